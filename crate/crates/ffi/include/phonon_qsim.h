#ifndef PHONON_QSIM_H
#define PHONON_QSIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PqStatus {
  PQ_STATUS_OK = 0,
  PQ_STATUS_NULL_POINTER = 1,
  PQ_STATUS_INVALID_ARGUMENT = 2,
  PQ_STATUS_NOT_CONVERGED = 3,
  PQ_STATUS_RESOURCE_CAP = 4,
  PQ_STATUS_IO = 5,
  PQ_STATUS_BUFFER_TOO_SMALL = 6,
  PQ_STATUS_PANIC = 7,
} PqStatus;

typedef struct PqCircuit PqCircuit;

// A Holstein chain and its general electron-phonon form.
typedef struct PqModel PqModel;

typedef struct PqState PqState;

typedef struct PqResources {
  size_t total;
  size_t two_qubit;
  size_t depth;
} PqResources;

typedef struct PqGroundEstimate {
  double energy;
  double bin_width;
  double peak_probability;
} PqGroundEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length of the last error message on this thread including the
// terminating NUL, or 0 if the last call succeeded.
size_t pq_last_error_length(void);

// Copies the last error message into `buf`, truncating to `len - 1` bytes.
// Returns the number of bytes written, excluding the NUL.
//
// # Safety
// `buf` must point to `len` writable bytes.
size_t pq_last_error_message(char *buf, size_t len);

// Holstein chain `t Σ (c†c + h.c.) + g Σ n_i X_i + Σ (P²/2 + ω²X²/2)`.
//
// # Safety
// `out` must be a valid pointer to a `PqModel*`.
enum PqStatus pq_holstein_new(size_t n_sites,
                              double t,
                              double omega,
                              double g,
                              size_t n_x,
                              bool periodic,
                              struct PqModel **out);

// As [`pq_holstein_new`] with `g` set from `α = g²/(2ω²t)`.
//
// # Safety
// `out` must be a valid pointer to a `PqModel*`.
enum PqStatus pq_holstein_from_alpha(size_t n_sites,
                                     double t,
                                     double omega,
                                     double alpha,
                                     size_t n_x,
                                     bool periodic,
                                     struct PqModel **out);

// # Safety
// `model` must come from a `pq_holstein_*` constructor, or be null.
void pq_model_free(struct PqModel *model);

// Electron plus phonon qubits of the model's layout, or 0 for null.
//
// # Safety
// `model` must be a live model or null.
size_t pq_model_n_qubits(const struct PqModel *model);

// `|0…0⟩` on `n_qubits` qubits.
//
// # Safety
// `out` must be a valid pointer to a `PqState*`.
enum PqStatus pq_state_new(size_t n_qubits, struct PqState **out);

// # Safety
// `state` must come from this library, or be null.
void pq_state_free(struct PqState *state);

// # Safety
// `state` must be a live state or null.
size_t pq_state_n_qubits(const struct PqState *state);

// Copies the `2^n` amplitudes into `re_im` (length `2·2^n`).
//
// # Safety
// `re_im` must point to `len` writable doubles.
enum PqStatus pq_state_amplitudes(const struct PqState *state, double *re_im, size_t len);

// Replaces the amplitudes with `re_im` (length exactly `2·2^n`).
//
// # Safety
// `re_im` must point to `len` readable doubles.
enum PqStatus pq_state_set_amplitudes(struct PqState *state, const double *re_im, size_t len);

// Marginal distribution of qubits `first .. first + count` (length `2^count`).
//
// # Safety
// `out` must point to `len` writable doubles.
enum PqStatus pq_state_probabilities(const struct PqState *state,
                                     size_t first,
                                     size_t count,
                                     double *out,
                                     size_t len);

// Optimizes the Gaussian-state ansatz with `steps` layers and returns the
// model's input state: two-site electron ground state (or lowest hopping
// orbital) times the Gaussian on every phonon register.
//
// # Safety
// `fidelity` may be null; `out` must be a valid pointer to a `PqState*`.
enum PqStatus pq_gaussian_input(const struct PqModel *model,
                                size_t steps,
                                uint64_t seed,
                                double target,
                                size_t restarts,
                                double *fidelity,
                                struct PqState **out);

// Trotter circuit for `exp(−iH·time)` in `steps` steps of order 1 or 2.
//
// # Safety
// `out` must be a valid pointer to a `PqCircuit*`.
enum PqStatus pq_trotter_circuit(const struct PqModel *model,
                                 double time,
                                 size_t steps,
                                 uint8_t order,
                                 struct PqCircuit **out);

// # Safety
// `circuit` must come from this library, or be null.
void pq_circuit_free(struct PqCircuit *circuit);

// # Safety
// `out` must be a valid pointer.
enum PqStatus pq_circuit_resources(const struct PqCircuit *circuit, struct PqResources *out);

// Tracked global phase of the circuit in radians.
//
// # Safety
// `circuit` must be a live circuit or null.
double pq_circuit_global_phase(const struct PqCircuit *circuit);

// Applies the gates and, if `with_phase`, the tracked global phase.
//
// # Safety
// `circuit` and `state` must be live objects.
enum PqStatus pq_circuit_apply(const struct PqCircuit *circuit,
                               struct PqState *state,
                               bool with_phase);

// Text form of the circuit; release with [`pq_string_free`].
//
// # Safety
// `out` must be a valid pointer to a `char*`.
enum PqStatus pq_circuit_to_text(const struct PqCircuit *circuit, char **out);

// # Safety
// `s` must come from this library, or be null.
void pq_string_free(char *s);

// Fock-basis ground state: energy into `energy`, `Z(0..len)` into `z`.
//
// # Safety
// `energy` must be valid; `z` must point to `len` writable doubles.
enum PqStatus pq_holstein_ed(const struct PqModel *model,
                             size_t n_cut,
                             double *energy,
                             double *z,
                             size_t len);

// Ground energy by coarse-then-fine phase estimation from `input`, with
// the library's default schedule apart from the ancilla counts and `dt`.
//
// # Safety
// `model`, `input` and `out` must be valid.
enum PqStatus pq_ground_energy(const struct PqModel *model,
                               const struct PqState *input,
                               size_t coarse_ancilla,
                               size_t fine_ancilla,
                               double dt,
                               struct PqGroundEstimate *out);

// Phonon-number distribution `Z(0..len)` of `state` read out by phase
// estimation with `n_ancilla` ancillas.
//
// # Safety
// `z` must point to `len` writable doubles.
enum PqStatus pq_phonon_distribution(const struct PqModel *model,
                                     const struct PqState *state,
                                     size_t n_ancilla,
                                     double *z,
                                     size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHONON_QSIM_H */
