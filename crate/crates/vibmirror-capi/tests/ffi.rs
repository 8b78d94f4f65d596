//! Exercises the C surface the way a foreign caller would: through raw
//! pointers and status codes only.

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use vibmirror_capi::*;

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= want.abs() * rel
}

fn make(tag: &str) -> *mut VmParams {
    let tag = CString::new(tag).unwrap();
    let mut params = ptr::null_mut();
    let status = unsafe { vm_params_preset(tag.as_ptr(), &mut params) };
    assert_eq!(status, VmStatus::Ok);
    assert!(!params.is_null());
    params
}

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(vm_last_error_message())
            .to_string_lossy()
            .into_owned()
    }
}

fn scalar(call: impl FnOnce(*mut f64) -> VmStatus) -> f64 {
    let mut value = f64::NAN;
    assert_eq!(call(&mut value), VmStatus::Ok);
    value
}

#[test]
fn preset_scalars_come_back_through_the_boundary() {
    let params = make("a");
    unsafe {
        assert!(close(
            scalar(|out| vm_modulation_depth(params, out)),
            0.061_904_761_904_761_91,
            1e-12
        ));
        assert!(close(
            scalar(|out| vm_mirror_amplitude(params, out)),
            2.8785714285714286e-9,
            1e-12
        ));
        assert!(close(
            scalar(|out| vm_recoil_velocity(params, out)),
            0.005_884_551_051_301_624,
            1e-12
        ));
        assert!(close(
            scalar(|out| vm_modulation_index(params, out)),
            1.328095969911542,
            1e-12
        ));
        assert!(close(
            scalar(|out| vm_carrier_null_depth(params, out)),
            0.11209291869288527,
            1e-9
        ));
        let (mut speed, mut wavenumber, mut wavelength) = (0.0, 0.0, 0.0);
        assert_eq!(
            vm_impact(params, &mut speed, &mut wavenumber, &mut wavelength),
            VmStatus::Ok
        );
        assert!(close(speed, 0.265_766_815_084_201_2, 1e-12));
        assert!(close(wavenumber, 363_696_460.187_989_1, 1e-12));
        assert!(close(wavelength, 1.727590448345828e-8, 1e-12));
        vm_params_free(params);
    }
}

#[test]
fn config_text_builds_the_same_run_as_the_matching_preset() {
    let text = CString::new("[experiment]\ndetuning_swing_hz = 163e6\n").unwrap();
    let mut from_text = ptr::null_mut();
    assert_eq!(
        unsafe { vm_params_from_config(text.as_ptr(), &mut from_text) },
        VmStatus::Ok
    );
    let preset_b = make("b");
    unsafe {
        let text_depth = scalar(|out| vm_modulation_depth(from_text, out));
        let preset_depth = scalar(|out| vm_modulation_depth(preset_b, out));
        assert_eq!(text_depth, preset_depth);
        vm_params_free(from_text);
        vm_params_free(preset_b);
    }
}

#[test]
fn failures_set_the_status_and_the_message() {
    let mut params = ptr::null_mut();

    let unknown = CString::new("z").unwrap();
    assert_eq!(
        unsafe { vm_params_preset(unknown.as_ptr(), &mut params) },
        VmStatus::Config
    );
    assert!(last_error().contains('z'), "message: {}", last_error());

    let broken = CString::new("[experiment]\nheight = 1\n").unwrap();
    assert_eq!(
        unsafe { vm_params_from_config(broken.as_ptr(), &mut params) },
        VmStatus::Config
    );
    assert!(last_error().contains("line 2"), "message: {}", last_error());

    let not_utf8: [c_char; 2] = [-1i8 as c_char, 0];
    assert_eq!(
        unsafe { vm_params_preset(not_utf8.as_ptr(), &mut params) },
        VmStatus::Utf8
    );

    assert_eq!(
        unsafe { vm_params_preset(ptr::null(), &mut params) },
        VmStatus::NullPointer
    );
    let good = make("a");
    assert_eq!(
        unsafe { vm_modulation_depth(good, ptr::null_mut()) },
        VmStatus::NullPointer
    );
    assert!(params.is_null(), "out-pointer written on failure");
    unsafe { vm_params_free(good) };
    unsafe { vm_params_free(ptr::null_mut()) };
}

#[test]
fn detection_positions_fill_caller_arrays() {
    let params = make("a");
    let mut orders = [0i32; 8];
    let mut offsets = [0f64; 8];
    let mut count = 0usize;
    let status = unsafe {
        vm_detection_positions(
            params,
            2,
            orders.as_mut_ptr(),
            offsets.as_mut_ptr(),
            orders.len(),
            &mut count,
        )
    };
    assert_eq!(status, VmStatus::Ok);
    assert_eq!(count, 5);
    assert_eq!(&orders[..count], &[-2, -1, 0, 1, 2]);
    let expected_um = [
        -482.683_609_865_091_7,
        -237.14327610180376,
        0.0,
        229.55297542765462,
        452.200_944_919_291_5,
    ];
    for (offset, expected) in offsets[..count].iter().zip(expected_um) {
        assert!((offset * 1e6 - expected).abs() <= 1e-6);
    }

    let cramped = unsafe {
        vm_detection_positions(
            params,
            2,
            orders.as_mut_ptr(),
            offsets.as_mut_ptr(),
            3,
            &mut count,
        )
    };
    assert_eq!(cramped, VmStatus::Contract);
    assert!(
        last_error().contains("capacity"),
        "message: {}",
        last_error()
    );
    unsafe { vm_params_free(params) };
}

#[test]
fn spectra_round_trip_through_the_handle() {
    let params = make("a");
    let mut spectrum = ptr::null_mut();
    assert_eq!(
        unsafe { vm_sideband_weights(params, &mut spectrum) },
        VmStatus::Ok
    );
    unsafe {
        let total = scalar(|out| vm_spectrum_total(spectrum, out));
        assert!((1.0 - 1e-6..=1.0 + 1e-12).contains(&total));
        assert!(close(
            scalar(|out| vm_spectrum_modulation_index(spectrum, out)),
            1.328095969911542,
            1e-12
        ));
        assert!(close(
            scalar(|out| vm_spectrum_weight(spectrum, 0, out)),
            0.3664297371470207,
            1e-12
        ));
        let up = scalar(|out| vm_spectrum_weight(spectrum, 1, out));
        let down = scalar(|out| vm_spectrum_weight(spectrum, -1, out));
        assert_eq!(up, down);
        assert_eq!(scalar(|out| vm_spectrum_weight(spectrum, 9999, out)), 0.0);

        let mut len = 0usize;
        assert_eq!(vm_spectrum_len(spectrum, &mut len), VmStatus::Ok);
        assert!(len >= 11);
        let (mut order, mut weight) = (0i32, 0f64);
        assert_eq!(
            vm_spectrum_entry(spectrum, 0, &mut order, &mut weight),
            VmStatus::Ok
        );
        assert_eq!(order, -(((len - 1) / 2) as i32), "span is symmetric");
        assert_eq!(
            vm_spectrum_entry(spectrum, len, &mut order, &mut weight),
            VmStatus::Contract
        );
        vm_spectrum_free(spectrum);
    }

    let mut hard = ptr::null_mut();
    assert_eq!(
        unsafe { vm_hard_mirror_weights(params, &mut hard) },
        VmStatus::Ok
    );
    unsafe {
        let total = scalar(|out| vm_spectrum_total(hard, out));
        assert!(total >= 1.0 - 1e-6);
        // without the envelope the same amplitude spreads the weights further
        assert!(
            scalar(|out| vm_spectrum_weight(hard, 0, out))
                < scalar(|out| vm_spectrum_modulation_index(hard, out))
        );
        assert!(close(
            scalar(|out| vm_spectrum_modulation_index(hard, out)),
            2.0 * 363_696_460.187_989_1 * 2.8785714285714286e-9,
            1e-12
        ));
        vm_spectrum_free(hard);
        vm_spectrum_free(ptr::null_mut());
        vm_params_free(params);
    }
}

#[test]
fn pure_helpers_need_no_handles() {
    assert_eq!(vm_abi_version(), 1);
    assert_eq!(vm_beta(0.0), 1.0);
    assert!(vm_beta(1.0) < 1.0 && vm_beta(1.0) > 0.0);
    assert_eq!(vm_bessel_j(0, 0.0), 1.0);
    assert!((vm_bessel_j(1, 1.0) - 0.44005058574493355).abs() < 1e-14);
    assert!(vm_bessel_j(0, 1e9).is_nan());
}

#[test]
fn generated_header_declares_the_whole_surface() {
    let header = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/vibmirror.h"),
    )
    .unwrap();
    for symbol in [
        "vm_abi_version",
        "vm_last_error_message",
        "vm_params_preset",
        "vm_params_from_config",
        "vm_params_free",
        "vm_modulation_depth",
        "vm_mirror_amplitude",
        "vm_modulation_index",
        "vm_recoil_velocity",
        "vm_impact",
        "vm_carrier_null_depth",
        "vm_detection_positions",
        "vm_sideband_weights",
        "vm_hard_mirror_weights",
        "vm_spectrum_free",
        "vm_spectrum_len",
        "vm_spectrum_entry",
        "vm_spectrum_weight",
        "vm_spectrum_total",
        "vm_spectrum_modulation_index",
        "vm_beta",
        "vm_bessel_j",
        "VM_STATUS_OK",
        "typedef struct VmParams VmParams",
        "typedef struct VmSpectrum VmSpectrum",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
