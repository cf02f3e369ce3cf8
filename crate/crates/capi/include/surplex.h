/* C interface to the surplex solver. All rationals in JSON payloads are exact strings. */

#ifndef SURPLEX_H
#define SURPLEX_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every C-API call.
typedef enum SurplexStatus {
  // Success; for solver calls this means feasible/verified.
  SURPLEX_STATUS_OK = 0,
  // The operation ran but the answer is negative: conditions violated,
  // no menu exists, or the menu failed verification. A JSON report with
  // the certificate is still produced.
  SURPLEX_STATUS_INFEASIBLE = 1,
  // Malformed input (parse or validation failure).
  SURPLEX_STATUS_INVALID_INPUT = 2,
  // A required pointer argument was null.
  SURPLEX_STATUS_NULL_POINTER = 3,
  // Internal panic; a bug. Details via `surplex_last_error_message`.
  SURPLEX_STATUS_PANIC = 4,
} SurplexStatus;

// Menu-construction method.
typedef enum SurplexMethod {
  // Require a separating functional for every behavioral belief
  // (the CLI's `--method theorem`).
  SURPLEX_METHOD_SEPARATION = 0,
  // Allow in-hull behavioral beliefs when their valuations clear the
  // decomposition threshold (the CLI's `--method proposition`).
  SURPLEX_METHOD_VALUE_CONDITION = 1,
} SurplexMethod;

// Instance-generator regime.
typedef enum SurplexRegime {
  SURPLEX_REGIME_FEASIBLE = 0,
  SURPLEX_REGIME_STRATEGIC_DEPENDENT = 1,
  SURPLEX_REGIME_BEHAVIORAL_IN_HULL = 2,
  SURPLEX_REGIME_VALUE_FEASIBLE = 3,
  SURPLEX_REGIME_VALUE_INFEASIBLE = 4,
} SurplexRegime;

// Opaque auction handle.
typedef struct SurplexAuction SurplexAuction;

// Opaque validated environment handle.
typedef struct SurplexEnv SurplexEnv;

// Opaque contract-menu handle.
typedef struct SurplexMenu SurplexMenu;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static string; do not free.
const char *surplex_version(void);

// Message for the most recent failing call on this thread, or null. Owned
// by the library; valid until the next failing call on the same thread.
const char *surplex_last_error_message(void);

// Releases a string returned through an `out_json` parameter.
//
// # Safety
// `s` must be a pointer previously returned by this library (or null).
void surplex_string_free(char *s);

// Parses and validates an environment from JSON.
//
// # Safety
// `json` must be NUL-terminated; `out_env` must be a valid pointer.
enum SurplexStatus surplex_env_parse(const char *json, struct SurplexEnv **out_env);

// # Safety
// `env` must come from `surplex_env_parse` (or be null).
void surplex_env_free(struct SurplexEnv *env);

// Serializes an environment back to JSON.
//
// # Safety
// `env` must be a live handle; `out_json` must be a valid pointer.
enum SurplexStatus surplex_env_to_json(const struct SurplexEnv *env, char **out_json);

// Parses a contract menu from JSON.
//
// # Safety
// `json` must be NUL-terminated; `out_menu` must be a valid pointer.
enum SurplexStatus surplex_menu_parse(const char *json, struct SurplexMenu **out_menu);

// # Safety
// `menu` must come from `surplex_menu_parse` (or be null).
void surplex_menu_free(struct SurplexMenu *menu);

// Parses and validates an auction from JSON.
//
// # Safety
// `json` must be NUL-terminated; `out_auction` must be a valid pointer.
enum SurplexStatus surplex_auction_parse(const char *json, struct SurplexAuction **out_auction);

// # Safety
// `auction` must come from `surplex_auction_parse` (or be null).
void surplex_auction_free(struct SurplexAuction *auction);

// Evaluates the feasibility conditions; `Ok` when both hold, `Infeasible`
// otherwise, with the full JSON report (witnesses included) either way.
//
// # Safety
// `env` must be a live handle; `out_json` must be a valid pointer.
enum SurplexStatus surplex_check(const struct SurplexEnv *env, char **out_json);

// Constructs a fully extracting menu; `Ok` with the menu and derivations on
// success, `Infeasible` with the failure certificate otherwise.
//
// # Safety
// `env` must be a live handle; `out_json` must be a valid pointer.
enum SurplexStatus surplex_solve(const struct SurplexEnv *env,
                                 enum SurplexMethod method,
                                 char **out_json);

// Audits a menu: `Ok` when it extracts fully and is incentive compatible,
// `Infeasible` with the violation report otherwise.
//
// # Safety
// `env` and `menu` must be live handles; `out_json` must be a valid pointer.
enum SurplexStatus surplex_verify(const struct SurplexEnv *env,
                                  const struct SurplexMenu *menu,
                                  char **out_json);

// Construction-free feasibility oracle; `Ok` with a witness menu or
// `Infeasible` with the Farkas certificate.
//
// # Safety
// `env` must be a live handle; `out_json` must be a valid pointer.
enum SurplexStatus surplex_oracle(const struct SurplexEnv *env, char **out_json);

// Solves the auction through per-bidder reductions; `Ok` with transfers and
// the revenue audit when every bidder is feasible, `Infeasible` with the
// per-bidder reports otherwise.
//
// # Safety
// `auction` must be a live handle; `out_json` must be a valid pointer.
enum SurplexStatus surplex_auction_solve(const struct SurplexAuction *auction, char **out_json);

// Generates a seeded environment in the given regime, as environment JSON
// accepted by `surplex_env_parse`.
//
// # Safety
// `out_json` must be a valid pointer.
enum SurplexStatus surplex_generate(uint64_t seed,
                                    uint32_t num_states,
                                    uint32_t num_strategic,
                                    uint32_t num_behavioral,
                                    enum SurplexRegime regime,
                                    uint64_t denominator_bound,
                                    char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURPLEX_H */
