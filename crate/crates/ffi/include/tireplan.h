#ifndef TIREPLAN_H
#define TIREPLAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TpStatus {
  TP_STATUS_OK = 0,
  TP_STATUS_NULL_ARGUMENT = 1,
  TP_STATUS_INVALID_UTF8 = 2,
  TP_STATUS_PARSE = 3,
  TP_STATUS_INVALID_INSTANCE = 4,
  TP_STATUS_INFEASIBLE = 5,
  TP_STATUS_SOLVER = 6,
  TP_STATUS_IO = 7,
  TP_STATUS_BUFFER_TOO_SMALL = 8,
  TP_STATUS_PANIC = 9,
  TP_STATUS_OTHER = 10,
} TpStatus;

// Opaque problem instance.
typedef struct TpInstance TpInstance;

// Opaque production plan.
typedef struct TpPlan TpPlan;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *tp_last_error(void);

// Library version as a static string.
const char *tp_version(void);

// Parses and validates an instance from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum TpStatus tp_instance_from_json(const char *json, struct TpInstance **out);

// Loads and validates an instance file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum TpStatus tp_instance_load(const char *path, struct TpInstance **out);

// Generates a small seeded instance of one week.
//
// # Safety
// `out` must be a valid pointer.
enum TpStatus tp_instance_generate(uint64_t seed,
                                   size_t items,
                                   size_t presses,
                                   size_t periods,
                                   struct TpInstance **out);

// Writes the instance dimensions; any output pointer may be null.
//
// # Safety
// `inst` must be a live handle; non-null outputs must be valid.
enum TpStatus tp_instance_dims(const struct TpInstance *inst,
                               size_t *items,
                               size_t *presses,
                               size_t *periods);

// # Safety
// `inst` must be null or a handle not yet freed.
void tp_instance_free(struct TpInstance *inst);

// Runs the rolling-horizon matheuristic with the calibrated weights.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum TpStatus tp_solve_matheuristic(const struct TpInstance *inst,
                                    double lssp_seconds,
                                    double assp_seconds,
                                    struct TpPlan **out);

// Solves the integrated model with the calibrated weights.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum TpStatus tp_solve_integrated(const struct TpInstance *inst,
                                  double seconds,
                                  struct TpPlan **out);

// Greedy earliest-due-date plan.
//
// # Safety
// `inst` must be a live handle and `out` a valid pointer.
enum TpStatus tp_greedy_plan(const struct TpInstance *inst, struct TpPlan **out);

// # Safety
// `inst` must be a live handle, `path` a NUL-terminated string and `out` a
// valid pointer.
enum TpStatus tp_plan_load(const struct TpInstance *inst, const char *path, struct TpPlan **out);

// # Safety
// Both handles must be live and `path` a NUL-terminated string.
enum TpStatus tp_plan_save(const struct TpInstance *inst,
                           const struct TpPlan *plan,
                           const char *path);

// # Safety
// `plan` must be null or a handle not yet freed.
void tp_plan_free(struct TpPlan *plan);

// Counts the rule violations of a plan; zero means feasible.
//
// # Safety
// Both handles must be live and `violations` a valid pointer.
enum TpStatus tp_audit(const struct TpInstance *inst,
                       const struct TpPlan *plan,
                       size_t *violations);

// Writes the KPIs `BC1..BCγ, BT, OS, US, OF` under the calibrated weights
// into `values`. `len` receives the number of values even when `capacity`
// is too small, in which case nothing is written.
//
// # Safety
// Both handles must be live, `len` valid and `values` valid for `capacity`
// writes.
enum TpStatus tp_kpis(const struct TpInstance *inst,
                      const struct TpPlan *plan,
                      double *values,
                      size_t capacity,
                      size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TIREPLAN_H */
