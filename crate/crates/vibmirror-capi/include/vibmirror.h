#ifndef VIBMIRROR_H
#define VIBMIRROR_H

/* Generated by cbindgen from vibmirror-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a call. Anything but `VM_STATUS_OK` leaves the out-pointers
// untouched and records a message for [`vm_last_error_message`].
typedef enum VmStatus {
  VM_STATUS_OK = 0,
  // A required pointer argument was null.
  VM_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  VM_STATUS_UTF8 = 2,
  // A physical quantity is outside its meaningful range.
  VM_STATUS_DOMAIN = 3,
  // A call was made outside its validity contract.
  VM_STATUS_CONTRACT = 4,
  // Malformed or inconsistent configuration input.
  VM_STATUS_CONFIG = 5,
  VM_STATUS_IO = 6,
  // An internal panic was caught at the boundary.
  VM_STATUS_INTERNAL = 7,
} VmStatus;

// Opaque: a fully resolved run configuration.
typedef struct VmParams VmParams;

// Opaque: a set of sideband weights indexed by order.
typedef struct VmSpectrum VmSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// ABI revision of this header; bumped on any breaking change.
uint32_t vm_abi_version(void);

// Message describing the most recent failure on the calling thread. The
// pointer stays valid until the next failing call on the same thread.
const char *vm_last_error_message(void);

// Create a parameter set from a named preset ("a", "b", or "c").
enum VmStatus vm_params_preset(const char *tag, struct VmParams **out);

// Create a parameter set from INI-style configuration text; keys that are
// left out fall back to preset "a".
enum VmStatus vm_params_from_config(const char *text, struct VmParams **out);

// Release a parameter set. Null is a no-op.
void vm_params_free(struct VmParams *params);

// Combined relative modulation depth of the mirror drive.
enum VmStatus vm_modulation_depth(const struct VmParams *params, double *out);

// Vibration amplitude of the mirror surface, m.
enum VmStatus vm_mirror_amplitude(const struct VmParams *params, double *out);

// Phase-modulation index seen by the bouncing wave.
enum VmStatus vm_modulation_index(const struct VmParams *params, double *out);

// Single-photon recoil velocity for the configured atom, m/s.
enum VmStatus vm_recoil_velocity(const struct VmParams *params, double *out);

// Speed, wavenumber, and matter wavelength at the mirror after the drop.
enum VmStatus vm_impact(const struct VmParams *params,
                        double *out_speed,
                        double *out_wavenumber,
                        double *out_wavelength);

// Drive depth at which the carrier weight first vanishes.
enum VmStatus vm_carrier_null_depth(const struct VmParams *params, double *out);

// Fill `out_orders`/`out_offsets_m` with the open sideband orders up to
// `max_order` and their detector offsets relative to the carrier, m. Both
// arrays need room for `capacity` entries; the number written goes to
// `out_count`. Too small a capacity is a contract error.
enum VmStatus vm_detection_positions(const struct VmParams *params,
                                     uint32_t max_order,
                                     int32_t *out_orders,
                                     double *out_offsets_m,
                                     size_t capacity,
                                     size_t *out_count);

// Sideband weights of the modulated soft mirror for this parameter set.
enum VmStatus vm_sideband_weights(const struct VmParams *params, struct VmSpectrum **out);

// Sideband weights in the hard-mirror limit of the same parameter set.
enum VmStatus vm_hard_mirror_weights(const struct VmParams *params, struct VmSpectrum **out);

// Release a spectrum. Null is a no-op.
void vm_spectrum_free(struct VmSpectrum *spectrum);

// Number of orders the spectrum carries.
enum VmStatus vm_spectrum_len(const struct VmSpectrum *spectrum, size_t *out);

// Order and weight at `index` (ascending order of the orders).
enum VmStatus vm_spectrum_entry(const struct VmSpectrum *spectrum,
                                size_t index,
                                int32_t *out_order,
                                double *out_weight);

// Weight of one order; orders beyond the stored span report 0.
enum VmStatus vm_spectrum_weight(const struct VmSpectrum *spectrum, int32_t order, double *out);

// Sum of all stored weights (1 up to truncation).
enum VmStatus vm_spectrum_total(const struct VmSpectrum *spectrum, double *out);

// Modulation index the spectrum was computed at.
enum VmStatus vm_spectrum_modulation_index(const struct VmSpectrum *spectrum, double *out);

// Envelope factor mapping drive speed ratio to modulation-index reduction;
// 1 at 0, decaying for faster drives.
double vm_beta(double x);

// Bessel function J_n(x). Reports NaN outside the supported range instead
// of a status code so it can be used in expressions.
double vm_bessel_j(int32_t order, double x);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VIBMIRROR_H */
