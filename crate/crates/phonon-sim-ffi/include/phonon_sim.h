#ifndef PHONON_SIM_H
#define PHONON_SIM_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_ARGUMENT = 2,
  PS_STATUS_NUMERICAL = 3,
  PS_STATUS_IO = 4,
  PS_STATUS_UTF8 = 5,
  PS_STATUS_PANIC = 6,
} PsStatus;

// Fitted parameter rows.
typedef enum PsTableRow {
  PS_TABLE_ROW_FOCK = 0,
  PS_TABLE_ROW_COHERENT = 1,
  PS_TABLE_ROW_UPSILON = 2,
} PsTableRow;

// Sideband selector for tomography calls.
typedef enum PsSideband {
  PS_SIDEBAND_RED = 0,
  PS_SIDEBAND_BLUE = 1,
} PsSideband;

// Output format selector for `ps_run_experiment_toml`.
typedef enum PsFormat {
  PS_FORMAT_CSV = 0,
  PS_FORMAT_JSON = 1,
  PS_FORMAT_BOTH = 2,
} PsFormat;

// Opaque density operator.
typedef struct PsDensity PsDensity;

// Opaque simulation parameters.
typedef struct PsParams PsParams;

// Opaque Hilbert-space description.
typedef struct PsSpace PsSpace;

// Opaque pure state.
typedef struct PsState PsState;

// Opaque evolution result.
typedef struct PsTrajectory PsTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Thread-local message describing the most recent failure. The pointer stays
// valid until the next failing call on the same thread.
const char *ps_last_error_message(void);

// Library version as a static string.
const char *ps_version(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be null or a pointer previously returned by a `ps_*_to_json`-style
// call and not yet freed.
void ps_string_free(char *s);

// Creates a truncated space with the given Fock cutoffs (inclusive) and
// electronic level count (2 or 3).
//
// # Safety
// `out` must be valid for writes.
enum PsStatus ps_space_new(size_t n_max_1,
                           size_t n_max_2,
                           size_t electronic_levels,
                           struct PsSpace **out);

// Total dimension of the composite space.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_space_dim(const struct PsSpace *space, size_t *out);

// Releases a space handle.
//
// # Safety
// `handle` must be null or a pointer previously returned by this library
// and not yet freed.
void ps_space_free(struct PsSpace *handle);

// Builds simulation parameters; rates in kHz.
//
// # Safety
// `out` must be valid for writes.
enum PsStatus ps_params_new(double g1,
                            double g2,
                            double phi,
                            double gamma_m,
                            double gamma_e,
                            double n_th,
                            double contrast,
                            double offset,
                            struct PsParams **out);

// The fitted parameter set of one experiment family.
//
// # Safety
// `out` must be valid for writes.
enum PsStatus ps_params_table1(enum PsTableRow row, struct PsParams **out);

// Releases a parameter handle.
//
// # Safety
// `handle` must be null or a pointer previously returned by this library
// and not yet freed.
void ps_params_free(struct PsParams *handle);

// The ground ket |↓, 0, 0⟩.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_ground(const struct PsSpace *space, struct PsState **out);

// The maximally bright N-phonon collective state on |↓⟩.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_bright(const struct PsSpace *space,
                              size_t total_phonons,
                              struct PsState **out);

// The perfectly dark N-phonon collective state on |↓⟩.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_dark(const struct PsSpace *space,
                            size_t total_phonons,
                            struct PsState **out);

// The two-mode coherent state |α, e^{iφ}α⟩ on |↓⟩.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_coherent(const struct PsSpace *space,
                                double alpha_re,
                                double alpha_im,
                                double phi,
                                struct PsState **out);

// The motional product state ½(|0⟩+|1⟩)(|0⟩+e^{iφ}|1⟩) on |↓⟩.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_upsilon(const struct PsSpace *space, double phi, struct PsState **out);

// Runs the single-phonon preparation program, yielding
// |↓⟩(|0,1⟩+e^{iφ}|1,0⟩)/√2.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_single_phonon(const struct PsSpace *space, double phi, struct PsState **out);

// Dimension of the state's amplitude vector.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_dim(const struct PsState *state, size_t *out);

// Postselection weight carried by the state.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_weight(const struct PsState *state, double *out);

// Copies the amplitudes into caller-provided real/imaginary buffers of
// length `len` (= the state dimension).
//
// # Safety
// Buffers must be valid for `len` writes.
enum PsStatus ps_state_amplitudes(const struct PsState *state,
                                  double *out_re,
                                  double *out_im,
                                  size_t len);

// Serializes the state dump JSON; free with `ps_string_free`.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_to_json(const struct PsState *state, char **out);

// Number of collective-basis entries a decomposition of this state reports.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_decompose_len(const struct PsState *state, size_t *out);

// Decomposes the state into the collective basis. Buffers must hold
// `ps_state_decompose_len` entries; entry i reports the amplitude of
// |ψ_{bright[i]}^{total[i]}⟩.
//
// # Safety
// Buffers must be valid for `len` writes.
enum PsStatus ps_state_decompose(const struct PsState *state,
                                 uint32_t *out_total,
                                 uint32_t *out_bright,
                                 double *out_re,
                                 double *out_im,
                                 size_t len,
                                 double *out_residual);

// Releases a state handle.
//
// # Safety
// `handle` must be null or a pointer previously returned by this library
// and not yet freed.
void ps_state_free(struct PsState *handle);

// |ψ⟩⟨ψ| of a pure state.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_density_from_state(const struct PsState *state, struct PsDensity **out);

// Thermal product state at mean occupation `n_th` on |↓⟩⟨↓|.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_density_thermal(const struct PsSpace *space, double n_th, struct PsDensity **out);

// Applies per-mode displacements to a density operator; writes the
// truncation residual (dropped-tail probability).
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_density_tickle(const struct PsDensity *rho,
                                double alpha1_re,
                                double alpha1_im,
                                double alpha2_re,
                                double alpha2_im,
                                struct PsDensity **out,
                                double *out_residual);

// Releases a density handle.
//
// # Safety
// `handle` must be null or a pointer previously returned by this library
// and not yet freed.
void ps_density_free(struct PsDensity *handle);

// Closed-system evolution of a pure state under the bichromatic interaction
// on a uniform grid of `samples` points spanning [0, duration]. The readout
// model of `params` fills the reported populations.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_evolve_unitary(const struct PsParams *params,
                                const struct PsState *state,
                                double duration_ms,
                                size_t samples,
                                struct PsTrajectory **out);

// Lindblad evolution of a density operator with the dephasing collapse
// operators of `params`, readout model applied.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_evolve_lindblad(const struct PsParams *params,
                                 const struct PsDensity *rho,
                                 double duration_ms,
                                 size_t samples,
                                 struct PsTrajectory **out);

// Number of samples in a trajectory.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_trajectory_len(const struct PsTrajectory *traj, size_t *out);

// Copies the sample times (ms).
//
// # Safety
// The buffer must be valid for `len` writes.
enum PsStatus ps_trajectory_times(const struct PsTrajectory *traj, double *out, size_t len);

// Copies the excited-state populations.
//
// # Safety
// The buffer must be valid for `len` writes.
enum PsStatus ps_trajectory_p_up(const struct PsTrajectory *traj, double *out, size_t len);

// Copies the readout-model populations (contrast/offset applied).
//
// # Safety
// The buffer must be valid for `len` writes.
enum PsStatus ps_trajectory_p_reported(const struct PsTrajectory *traj, double *out, size_t len);

// Releases a trajectory handle.
//
// # Safety
// `handle` must be null or a pointer previously returned by this library
// and not yet freed.
void ps_trajectory_free(struct PsTrajectory *handle);

// Evaluates the sideband Rabi signal Σ_n p_n·½[1 − cos(2πΩ_n t)e^{−2πγ_n t}]
// for a distribution `probs[0..n_probs]` at the given times.
//
// # Safety
// Buffers must be valid for the stated lengths.
enum PsStatus ps_rabi_signal(const double *probs,
                             size_t n_probs,
                             double omega0_khz,
                             double eta,
                             double decay_khz,
                             double decay_exponent,
                             enum PsSideband sideband,
                             const double *times,
                             double *out,
                             size_t len);

// Jointly fits an RSB and a BSB trace (same mode, shared time axes allowed
// to differ) and writes the fitted probabilities and their uncertainties
// into buffers of length `n_max + 1`.
//
// # Safety
// Buffers must be valid for the stated lengths.
enum PsStatus ps_fit_distribution(const double *rsb_times,
                                  const double *rsb_p_up,
                                  size_t rsb_len,
                                  const double *bsb_times,
                                  const double *bsb_p_up,
                                  size_t bsb_len,
                                  double omega0_khz,
                                  double eta,
                                  double decay_khz,
                                  double decay_exponent,
                                  size_t n_max,
                                  double *out_probs,
                                  double *out_stderr,
                                  double *out_residual);

// Parses a TOML experiment config, runs it, and writes the result tables
// into `out_dir`.
//
// # Safety
// `config_toml` and `out_dir` must be NUL-terminated strings.
enum PsStatus ps_run_experiment_toml(const char *config_toml,
                                     const char *out_dir,
                                     enum PsFormat format);

// Weight (survival probability) of a prepared product state: convenience
// check that the two postselection rounds behaved as expected.
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_prepare_upsilon(const struct PsSpace *space,
                                       double phi1,
                                       double phi2,
                                       struct PsState **out);

// Electronic-level population of a state (0 = down, 1 = up, 2 = auxiliary).
//
// # Safety
// Pointers must be valid.
enum PsStatus ps_state_level_population(const struct PsState *state, uint32_t level, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHONON_SIM_H */
