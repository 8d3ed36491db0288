use std::ffi::CString;
use std::ptr;

use fredres_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { fredres_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

#[test]
fn zero_coefficients_give_unit_determinant() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(fredres_coefficients_preset(FredresPreset::Zero, &mut c), FredresStatus::Ok);
        let mut d = FredresComplex::default();
        let k = FredresComplex { re: 1.3, im: 0.4 };
        assert_eq!(fredres_determinant(c, k, FredresBranch::Plus, 32, &mut d), FredresStatus::Ok);
        assert!((d.re - 1.0).abs() < 1e-14 && d.im.abs() < 1e-14);
        fredres_coefficients_free(c);
    }
}

#[test]
fn nystrom_and_ode_agree_through_the_abi() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(fredres_coefficients_preset(FredresPreset::Smooth, &mut c), FredresStatus::Ok);
        let k = FredresComplex { re: 2.0, im: 0.5 };
        let (mut a, mut b) = (FredresComplex::default(), FredresComplex::default());
        assert_eq!(fredres_determinant(c, k, FredresBranch::Minus, 64, &mut a), FredresStatus::Ok);
        assert_eq!(fredres_determinant(c, k, FredresBranch::Minus, 0, &mut b), FredresStatus::Ok);
        assert!((a.re - b.re).hypot(a.im - b.im) < 1e-9, "{a:?} vs {b:?}");
        fredres_coefficients_free(c);
    }
}

#[test]
fn toml_coefficients_and_smatrix_routes() {
    let text = CString::new("[coefficients]\npreset = \"box\"\n").unwrap();
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(fredres_coefficients_from_toml(text.as_ptr(), &mut c), FredresStatus::Ok, "{}", last_error());
        let (mut s, mut sd) = (FredresComplex::default(), FredresComplex::default());
        let k = FredresComplex { re: 1.7, im: 0.0 };
        assert_eq!(fredres_smatrix_plus(c, k, 64, &mut s, &mut sd), FredresStatus::Ok, "{}", last_error());
        assert!((s.re - sd.re).hypot(s.im - sd.im) < 1e-8);
        assert!((s.re.hypot(s.im) - 1.0).abs() < 1e-8);
        fredres_coefficients_free(c);
    }
}

#[test]
fn resonance_set_handle() {
    let mut c = ptr::null_mut();
    let mut set = ptr::null_mut();
    unsafe {
        assert_eq!(fredres_coefficients_preset(FredresPreset::Box, &mut c), FredresStatus::Ok);
        assert_eq!(fredres_find_resonances(c, 0.3, 11.0, 1e-10, &mut set), FredresStatus::Ok, "{}", last_error());
        let n = fredres_resonance_set_len(set);
        assert!(n > 0);
        let mut total = 0i64;
        for i in 0..n {
            let mut r = FredresResonance::default();
            assert_eq!(fredres_resonance_set_get(set, i, &mut r), FredresStatus::Ok);
            assert!(r.multiplicity >= 1);
            let m = r.re.hypot(r.im);
            assert!((0.3..=11.0).contains(&m));
            let mut d = FredresComplex::default();
            fredres_determinant(c, FredresComplex { re: r.re, im: r.im }, FredresBranch::Plus, 0, &mut d);
            assert!(d.re.hypot(d.im) < 1e-6);
            total += r.multiplicity as i64;
        }
        assert_eq!(total, fredres_resonance_set_boundary_count(set));
        let mut r = FredresResonance::default();
        assert_eq!(fredres_resonance_set_get(set, n, &mut r), FredresStatus::InvalidArgument);
        fredres_resonance_set_free(set);
        fredres_coefficients_free(c);
    }
}

#[test]
fn errors_are_reported() {
    let mut c = ptr::null_mut();
    unsafe {
        let bad = CString::new("[coefficients\n").unwrap();
        assert_ne!(fredres_coefficients_from_toml(bad.as_ptr(), &mut c), FredresStatus::Ok);
        assert!(!last_error().is_empty());
        let mut d = FredresComplex::default();
        let k = FredresComplex { re: 1.0, im: 0.0 };
        assert_eq!(fredres_determinant(ptr::null(), k, FredresBranch::Plus, 16, &mut d), FredresStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(fredres_coefficients_preset(FredresPreset::Box, &mut c), FredresStatus::Ok);
        let zero = FredresComplex { re: 0.0, im: 0.0 };
        assert_ne!(fredres_determinant(c, zero, FredresBranch::Plus, 16, &mut d), FredresStatus::Ok);
        fredres_coefficients_free(c);
        fredres_coefficients_free(ptr::null_mut());
        fredres_resonance_set_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fredres.h")).unwrap();
    assert!(h.contains("#ifndef FREDRES_H"));
    for f in ["fredres_determinant", "fredres_find_resonances", "fredres_resonance_set_free", "FredresStatus_Ok"] {
        assert!(h.contains(f), "{f}");
    }
}
