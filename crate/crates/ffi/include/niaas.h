#ifndef NIAAS_H
#define NIAAS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every entry point.
typedef enum NiaasStatus {
  NIAAS_STATUS_OK = 0,
  NIAAS_STATUS_NULL_ARGUMENT = 1,
  NIAAS_STATUS_INVALID_UTF8 = 2,
  NIAAS_STATUS_SYNTAX_ERROR = 3,
  NIAAS_STATUS_VIOLATION = 4,
  NIAAS_STATUS_NO_PATH = 5,
  NIAAS_STATUS_SLICE_ERROR = 6,
  NIAAS_STATUS_UNKNOWN_SLICE = 7,
  NIAAS_STATUS_INTERNAL = 8,
} NiaasStatus;

// An RDF model.
typedef struct NiaasModel NiaasModel;

// A controller, broker and aggregate managers sharing one clock.
typedef struct NiaasWorld NiaasWorld;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or null.
// The pointer stays valid until the next call into this library.
const char *niaas_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and must not be used afterwards.
void niaas_string_free(char *s);

// Parses an NDL-Lite document.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum NiaasStatus niaas_model_parse(const char *text, struct NiaasModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must come from this library and must not be used afterwards.
void niaas_model_free(struct NiaasModel *model);

// Number of triples, or 0 for a null handle.
//
// # Safety
// `model` must be null or a live handle.
uintptr_t niaas_model_len(const struct NiaasModel *model);

// Serializes a model back to canonical NDL-Lite text.
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum NiaasStatus niaas_model_serialize(const struct NiaasModel *model, char **out);

// Merges the model with the built-in schema and computes its closure.
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum NiaasStatus niaas_model_entail(const struct NiaasModel *model, struct NiaasModel **out);

// Validates a request model. Writes one `ISSUE` or `VIOLATION` line per
// finding to `report` (possibly empty) and returns `Violation` when there
// is at least one finding.
//
// # Safety
// `model` must be a live handle; `report` must be writable.
enum NiaasStatus niaas_model_validate(const struct NiaasModel *model, char **report);

// Finds the shortest valid path between two elements of a substrate.
// `layer` may be null for Ethernet. Names may be `<iri>` or a CURIE known to
// the model. On success `listing` receives `HOP`, `INTERNAL` and `LABEL`
// lines; `NoPath` is returned when no path satisfies the constraints.
//
// # Safety
// Pointers must be live and NUL-terminated where they are strings;
// `listing` must be writable.
enum NiaasStatus niaas_shortest_path(const struct NiaasModel *substrate,
                                     const char *from,
                                     const char *to,
                                     const char *layer,
                                     int64_t bandwidth,
                                     char **listing);

// Creates an empty world whose clock starts at the UNIX epoch.
struct NiaasWorld *niaas_world_new(void);

// Releases a world. Null is ignored.
//
// # Safety
// `world` must come from this library and must not be used afterwards.
void niaas_world_free(struct NiaasWorld *world);

// Moves the clock forward to an RFC 3339 instant, expiring due slices.
//
// # Safety
// `world` must be a live handle; `instant` NUL-terminated.
enum NiaasStatus niaas_world_advance_time(struct NiaasWorld *world, const char *instant);

// Hands a substrate to a new aggregate manager and delegates it to the broker.
//
// # Safety
// Both handles must be live.
enum NiaasStatus niaas_world_load_substrate(struct NiaasWorld *world,
                                            const struct NiaasModel *substrate);

// Runs the full slice creation protocol. On success `manifest` (if not null)
// receives a copy of the manifest. Validation failures return `Violation`;
// other failures return `SliceError`.
//
// # Safety
// Handles must be live; `slice` NUL-terminated; `manifest` null or writable.
enum NiaasStatus niaas_world_create_slice(struct NiaasWorld *world,
                                          const char *slice,
                                          const struct NiaasModel *request,
                                          struct NiaasModel **manifest);

// Tears a slice down and releases its resources.
//
// # Safety
// `world` must be live; `slice` NUL-terminated.
enum NiaasStatus niaas_world_delete_slice(struct NiaasWorld *world, const char *slice);

// Writes the slice's lifecycle state name (for example `Provisioned`).
//
// # Safety
// `world` must be live; `slice` NUL-terminated; `out` writable.
enum NiaasStatus niaas_world_slice_state(const struct NiaasWorld *world,
                                         const char *slice,
                                         char **out);

// Writes the event log, one event per line.
//
// # Safety
// `world` must be live; `out` writable.
enum NiaasStatus niaas_world_log(const struct NiaasWorld *world, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NIAAS_H */
