//! C ABI over the vibmirror core.
//!
//! The surface follows the usual conventions for a C-callable library:
//!
//! * Opaque handles ([`VmParams`], [`VmSpectrum`]) created and freed here;
//!   never dereference them from C.
//! * Every fallible call returns a [`VmStatus`]; results travel through
//!   caller-owned out-pointers that are written only on `VM_STATUS_OK`.
//! * [`vm_last_error_message`] returns a thread-local description of the most
//!   recent failure on the calling thread.
//! * No call unwinds across the boundary; an internal panic is reported as
//!   `VM_STATUS_INTERNAL`.
//!
//! All pointer arguments must be valid for the duration of the call (null is
//! detected and reported; dangling pointers are the caller's responsibility),
//! which is the safety contract of every `unsafe` function below.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};

use vibmirror::config::{parse, preset, RunConfig};
use vibmirror::diffraction::{
    bessel_j, beta, carrier_null_depth, hard_mirror_weights, sideband_weights, DiffractionInput,
    SidebandSpectrum,
};
use vibmirror::kinematics::{detection_positions, impact_state};
use vibmirror::Error;

/// Outcome of a call. Anything but `VM_STATUS_OK` leaves the out-pointers
/// untouched and records a message for [`vm_last_error_message`].
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// A physical quantity is outside its meaningful range.
    Domain = 3,
    /// A call was made outside its validity contract.
    Contract = 4,
    /// Malformed or inconsistent configuration input.
    Config = 5,
    Io = 6,
    /// An internal panic was caught at the boundary.
    Internal = 7,
}

/// Opaque: a fully resolved run configuration.
pub struct VmParams {
    config: RunConfig,
}

/// Opaque: a set of sideband weights indexed by order.
pub struct VmSpectrum {
    inner: SidebandSpectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn fail(error: Error) -> VmStatus {
    set_error(&error.to_string());
    match error {
        Error::Domain(_) => VmStatus::Domain,
        Error::Contract(_) => VmStatus::Contract,
        Error::Config(_) => VmStatus::Config,
        Error::Io(_) => VmStatus::Io,
    }
}

fn guarded<F: FnOnce() -> VmStatus + UnwindSafe>(body: F) -> VmStatus {
    match catch_unwind(body) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            VmStatus::Internal
        }
    }
}

macro_rules! require {
    ($($ptr:expr),+) => {
        $(if $ptr.is_null() {
            set_error(concat!("null pointer: ", stringify!($ptr)));
            return VmStatus::NullPointer;
        })+
    };
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, VmStatus> {
    match CStr::from_ptr(ptr).to_str() {
        Ok(text) => Ok(text),
        Err(_) => {
            set_error("string argument is not valid UTF-8");
            Err(VmStatus::Utf8)
        }
    }
}

unsafe fn hand_out<T>(out: *mut *mut T, value: T) -> VmStatus {
    *out = Box::into_raw(Box::new(value));
    VmStatus::Ok
}

fn input_of(params: &VmParams) -> Result<DiffractionInput, Error> {
    DiffractionInput::from_experiment(&params.config.experiment, &params.config.constants)
}

/// ABI revision of this header; bumped on any breaking change.
#[no_mangle]
pub extern "C" fn vm_abi_version() -> u32 {
    1
}

/// Message describing the most recent failure on the calling thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Create a parameter set from a named preset ("a", "b", or "c").
#[no_mangle]
pub unsafe extern "C" fn vm_params_preset(tag: *const c_char, out: *mut *mut VmParams) -> VmStatus {
    guarded(|| {
        require!(tag, out);
        let tag = match read_str(tag) {
            Ok(tag) => tag,
            Err(status) => return status,
        };
        match preset(tag).and_then(|draft| draft.build()) {
            Ok(config) => hand_out(out, VmParams { config }),
            Err(error) => fail(error),
        }
    })
}

/// Create a parameter set from INI-style configuration text; keys that are
/// left out fall back to preset "a".
#[no_mangle]
pub unsafe extern "C" fn vm_params_from_config(
    text: *const c_char,
    out: *mut *mut VmParams,
) -> VmStatus {
    guarded(|| {
        require!(text, out);
        let text = match read_str(text) {
            Ok(text) => text,
            Err(status) => return status,
        };
        match parse(text).and_then(|draft| draft.build()) {
            Ok(config) => hand_out(out, VmParams { config }),
            Err(error) => fail(error),
        }
    })
}

/// Release a parameter set. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn vm_params_free(params: *mut VmParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Combined relative modulation depth of the mirror drive.
#[no_mangle]
pub unsafe extern "C" fn vm_modulation_depth(params: *const VmParams, out: *mut f64) -> VmStatus {
    guarded(|| {
        require!(params, out);
        *out = (*params).config.experiment.modulation.depth();
        VmStatus::Ok
    })
}

/// Vibration amplitude of the mirror surface, m.
#[no_mangle]
pub unsafe extern "C" fn vm_mirror_amplitude(params: *const VmParams, out: *mut f64) -> VmStatus {
    guarded(|| {
        require!(params, out);
        *out = (*params).config.experiment.mirror.vib_amplitude;
        VmStatus::Ok
    })
}

/// Phase-modulation index seen by the bouncing wave.
#[no_mangle]
pub unsafe extern "C" fn vm_modulation_index(params: *const VmParams, out: *mut f64) -> VmStatus {
    guarded(|| {
        require!(params, out);
        match input_of(&*params) {
            Ok(input) => {
                *out = input.modulation_index();
                VmStatus::Ok
            }
            Err(error) => fail(error),
        }
    })
}

/// Single-photon recoil velocity for the configured atom, m/s.
#[no_mangle]
pub unsafe extern "C" fn vm_recoil_velocity(params: *const VmParams, out: *mut f64) -> VmStatus {
    guarded(|| {
        require!(params, out);
        *out = (*params).config.constants.recoil_velocity();
        VmStatus::Ok
    })
}

/// Speed, wavenumber, and matter wavelength at the mirror after the drop.
#[no_mangle]
pub unsafe extern "C" fn vm_impact(
    params: *const VmParams,
    out_speed: *mut f64,
    out_wavenumber: *mut f64,
    out_wavelength: *mut f64,
) -> VmStatus {
    guarded(|| {
        require!(params, out_speed, out_wavenumber, out_wavelength);
        let config = &(*params).config;
        match impact_state(config.experiment.drop_height, &config.constants) {
            Ok(state) => {
                *out_speed = state.speed;
                *out_wavenumber = state.wavenumber;
                *out_wavelength = state.de_broglie_wavelength;
                VmStatus::Ok
            }
            Err(error) => fail(error),
        }
    })
}

/// Drive depth at which the carrier weight first vanishes.
#[no_mangle]
pub unsafe extern "C" fn vm_carrier_null_depth(params: *const VmParams, out: *mut f64) -> VmStatus {
    guarded(|| {
        require!(params, out);
        match input_of(&*params).and_then(|input| carrier_null_depth(&input)) {
            Ok(depth) => {
                *out = depth;
                VmStatus::Ok
            }
            Err(error) => fail(error),
        }
    })
}

/// Fill `out_orders`/`out_offsets_m` with the open sideband orders up to
/// `max_order` and their detector offsets relative to the carrier, m. Both
/// arrays need room for `capacity` entries; the number written goes to
/// `out_count`. Too small a capacity is a contract error.
#[no_mangle]
pub unsafe extern "C" fn vm_detection_positions(
    params: *const VmParams,
    max_order: u32,
    out_orders: *mut i32,
    out_offsets_m: *mut f64,
    capacity: usize,
    out_count: *mut usize,
) -> VmStatus {
    guarded(|| {
        require!(params, out_orders, out_offsets_m, out_count);
        let config = &(*params).config;
        let rows = match detection_positions(&config.experiment, &config.constants, max_order) {
            Ok(rows) => rows,
            Err(error) => return fail(error),
        };
        if rows.len() > capacity {
            set_error(&format!(
                "capacity {capacity} holds fewer than the {} open orders",
                rows.len()
            ));
            return VmStatus::Contract;
        }
        for (index, row) in rows.iter().enumerate() {
            *out_orders.add(index) = row.order;
            *out_offsets_m.add(index) = row.rel_position;
        }
        *out_count = rows.len();
        VmStatus::Ok
    })
}

/// Sideband weights of the modulated soft mirror for this parameter set.
#[no_mangle]
pub unsafe extern "C" fn vm_sideband_weights(
    params: *const VmParams,
    out: *mut *mut VmSpectrum,
) -> VmStatus {
    guarded(|| {
        require!(params, out);
        match input_of(&*params).and_then(|input| sideband_weights(&input, None)) {
            Ok(inner) => hand_out(out, VmSpectrum { inner }),
            Err(error) => fail(error),
        }
    })
}

/// Sideband weights in the hard-mirror limit of the same parameter set.
#[no_mangle]
pub unsafe extern "C" fn vm_hard_mirror_weights(
    params: *const VmParams,
    out: *mut *mut VmSpectrum,
) -> VmStatus {
    guarded(|| {
        require!(params, out);
        let result = input_of(&*params)
            .and_then(|input| hard_mirror_weights(input.wavenumber, input.mirror_amplitude, None));
        match result {
            Ok(inner) => hand_out(out, VmSpectrum { inner }),
            Err(error) => fail(error),
        }
    })
}

/// Release a spectrum. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn vm_spectrum_free(spectrum: *mut VmSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of orders the spectrum carries.
#[no_mangle]
pub unsafe extern "C" fn vm_spectrum_len(spectrum: *const VmSpectrum, out: *mut usize) -> VmStatus {
    guarded(|| {
        require!(spectrum, out);
        *out = (*spectrum).inner.orders.len();
        VmStatus::Ok
    })
}

/// Order and weight at `index` (ascending order of the orders).
#[no_mangle]
pub unsafe extern "C" fn vm_spectrum_entry(
    spectrum: *const VmSpectrum,
    index: usize,
    out_order: *mut i32,
    out_weight: *mut f64,
) -> VmStatus {
    guarded(|| {
        require!(spectrum, out_order, out_weight);
        let orders = &(*spectrum).inner.orders;
        match orders.get(index) {
            Some(&(order, weight)) => {
                *out_order = order;
                *out_weight = weight;
                VmStatus::Ok
            }
            None => {
                set_error(&format!(
                    "index {index} outside the {} stored orders",
                    orders.len()
                ));
                VmStatus::Contract
            }
        }
    })
}

/// Weight of one order; orders beyond the stored span report 0.
#[no_mangle]
pub unsafe extern "C" fn vm_spectrum_weight(
    spectrum: *const VmSpectrum,
    order: i32,
    out: *mut f64,
) -> VmStatus {
    guarded(|| {
        require!(spectrum, out);
        *out = (*spectrum).inner.weight(order).unwrap_or(0.0);
        VmStatus::Ok
    })
}

/// Sum of all stored weights (1 up to truncation).
#[no_mangle]
pub unsafe extern "C" fn vm_spectrum_total(spectrum: *const VmSpectrum, out: *mut f64) -> VmStatus {
    guarded(|| {
        require!(spectrum, out);
        *out = (*spectrum).inner.total();
        VmStatus::Ok
    })
}

/// Modulation index the spectrum was computed at.
#[no_mangle]
pub unsafe extern "C" fn vm_spectrum_modulation_index(
    spectrum: *const VmSpectrum,
    out: *mut f64,
) -> VmStatus {
    guarded(|| {
        require!(spectrum, out);
        *out = (*spectrum).inner.modulation_index;
        VmStatus::Ok
    })
}

/// Envelope factor mapping drive speed ratio to modulation-index reduction;
/// 1 at 0, decaying for faster drives.
#[no_mangle]
pub extern "C" fn vm_beta(x: f64) -> f64 {
    beta(x)
}

/// Bessel function J_n(x). Reports NaN outside the supported range instead
/// of a status code so it can be used in expressions.
#[no_mangle]
pub extern "C" fn vm_bessel_j(order: i32, x: f64) -> f64 {
    bessel_j(order, x).unwrap_or(f64::NAN)
}
