#ifndef BRAIN_H
#define BRAIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a call. `Ok` is zero; the remaining codes name the failure.
typedef enum BrainStatus {
  BRAIN_STATUS_OK = 0,
  BRAIN_STATUS_NULL_ARGUMENT = 1,
  BRAIN_STATUS_INVALID_UTF8 = 2,
  BRAIN_STATUS_INVALID_ARGUMENT = 3,
  BRAIN_STATUS_PANIC = 4,
  BRAIN_STATUS_XML_SYNTAX = 10,
  BRAIN_STATUS_UNKNOWN_RULE_KIND = 11,
  BRAIN_STATUS_MISSING_ATTRIBUTE = 12,
  BRAIN_STATUS_UNKNOWN_ELEMENT = 13,
  BRAIN_STATUS_MALFORMED_EXPR = 14,
  BRAIN_STATUS_INVALID_RULE = 15,
  BRAIN_STATUS_DUPLICATE_ID = 16,
  BRAIN_STATUS_NOT_FOUND = 17,
  BRAIN_STATUS_DANGLING_TASK_REF = 20,
  BRAIN_STATUS_DUPLICATE_GOAL_ID = 21,
  BRAIN_STATUS_CYCLIC_GOAL = 22,
  BRAIN_STATUS_INVALID_GOAL = 23,
  BRAIN_STATUS_DUPLICATE_TASK_ID = 24,
  BRAIN_STATUS_UNKNOWN_GOAL = 25,
  BRAIN_STATUS_EMPTY_SELECTION = 26,
  BRAIN_STATUS_CYCLIC_RULES = 30,
  BRAIN_STATUS_EXCLUSIVE_CONFLICT = 31,
  BRAIN_STATUS_DANGLING_RULE_REF = 32,
  BRAIN_STATUS_MISSING_GUARD = 33,
  BRAIN_STATUS_UNKNOWN_ATTACHED_TASK = 34,
  BRAIN_STATUS_BACKWARD_REROUTE = 35,
  BRAIN_STATUS_INVALID_REROUTE_TARGET = 36,
  BRAIN_STATUS_INVALID_GRAPH = 37,
  BRAIN_STATUS_UNRESOLVED_TASK = 40,
  BRAIN_STATUS_FAMILY_MISMATCH = 41,
  BRAIN_STATUS_UNBOUND_LINK = 42,
  BRAIN_STATUS_UNKNOWN_PARTNER_LINK = 43,
  BRAIN_STATUS_SCHEMA_VIOLATION = 44,
  BRAIN_STATUS_DUPLICATE_PROVIDER = 50,
  BRAIN_STATUS_UNKNOWN_PROVIDER = 51,
  BRAIN_STATUS_NO_PROVIDER_FOUND = 52,
  BRAIN_STATUS_PROVIDER_NOT_PROPOSED = 53,
  BRAIN_STATUS_MISSING_MOCK = 60,
  BRAIN_STATUS_TOO_LARGE = 61,
  BRAIN_STATUS_INVALID_TRACE = 62,
  BRAIN_STATUS_IO = 70,
} BrainStatus;

// A goal model.
typedef struct BrainGoals BrainGoals;

// An abstract or executable process document.
typedef struct BrainProcess BrainProcess;

// A provider registry.
typedef struct BrainRegistry BrainRegistry;

// A rule repository.
typedef struct BrainRules BrainRules;

// An execution trace.
typedef struct BrainTrace BrainTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *brain_last_error(void);

// Static name of a status code, such as "FamilyMismatch".
const char *brain_status_name(enum BrainStatus status);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void brain_string_free(char *s);

// Parses a goal model document.
//
// # Safety
// `xml` must be a NUL-terminated string; `out` must be writable.
enum BrainStatus brain_goals_parse(const char *xml, struct BrainGoals **out);

// # Safety
// `goals` must be NULL or a live handle.
void brain_goals_free(struct BrainGoals *goals);

// Creates an empty rule repository.
//
// # Safety
// `out` must be writable.
enum BrainStatus brain_rules_new(struct BrainRules **out);

// Loads every `*.xml` rule file of a directory.
//
// # Safety
// `dir` must be a NUL-terminated string; `out` must be writable.
enum BrainStatus brain_rules_load_dir(const char *dir, struct BrainRules **out);

// Adds one rule document; an id already present fails with DuplicateId.
//
// # Safety
// `rules` must be a live handle and `xml` a NUL-terminated string.
enum BrainStatus brain_rules_add(struct BrainRules *rules, const char *xml);

// Number of rules in the repository; 0 for NULL.
//
// # Safety
// `rules` must be NULL or a live handle.
size_t brain_rules_len(const struct BrainRules *rules);

// # Safety
// `rules` must be NULL or a live handle.
void brain_rules_free(struct BrainRules *rules);

// Parses a `<providers>` document.
//
// # Safety
// `xml` must be a NUL-terminated string; `out` must be writable.
enum BrainStatus brain_registry_parse(const char *xml, struct BrainRegistry **out);

// # Safety
// `registry` must be NULL or a live handle.
void brain_registry_free(struct BrainRegistry *registry);

// Composes the abstract process for a comma-separated list of goal ids,
// attaching every applicable constraint rule.
//
// # Safety
// Handles must be live, `goal_ids` NUL-terminated, `out` writable.
enum BrainStatus brain_compose(const struct BrainGoals *goals,
                               const struct BrainRules *rules,
                               const char *goal_ids,
                               struct BrainProcess **out);

// Parses a process document.
//
// # Safety
// `xml` must be a NUL-terminated string; `out` must be writable.
enum BrainStatus brain_process_parse(const char *xml, struct BrainProcess **out);

// Canonical XML of a process. Free the result with `brain_string_free`.
//
// # Safety
// `process` must be a live handle; `out` must be writable.
enum BrainStatus brain_process_serialize(const struct BrainProcess *process, char **out);

// # Safety
// `process` must be NULL or a live handle.
void brain_process_free(struct BrainProcess *process);

// Binds every partner link. `bindings` is NULL or a comma-separated list
// of `LINK=PROVIDER`; other links keep their provider when it is still
// proposed and otherwise take the first proposal. `rules` may be NULL, in
// which case no discovery rules apply.
//
// # Safety
// Non-NULL pointers must be live handles or NUL-terminated strings; `out`
// must be writable.
enum BrainStatus brain_bind(const struct BrainProcess *process,
                            const struct BrainRules *rules,
                            const struct BrainRegistry *registry,
                            const char *bindings,
                            struct BrainProcess **out);

// Runs an executable process against a `<mocks>` document in the
// environment given by an `<env>` document.
//
// # Safety
// `process` must be a live handle, the documents NUL-terminated strings,
// `out` writable.
enum BrainStatus brain_simulate(const struct BrainProcess *process,
                                const char *mocks_xml,
                                const char *env_xml,
                                uint64_t seed,
                                struct BrainTrace **out);

// Parses the line-oriented trace format.
//
// # Safety
// `trace_text` must be a NUL-terminated string; `out` must be writable.
enum BrainStatus brain_trace_parse(const char *trace_text, struct BrainTrace **out);

// Text form of a trace. Free the result with `brain_string_free`.
//
// # Safety
// `trace` must be a live handle; `out` must be writable.
enum BrainStatus brain_trace_text(const struct BrainTrace *trace, char **out);

// True when the trace completed without a fault; false for NULL.
//
// # Safety
// `trace` must be NULL or a live handle.
bool brain_trace_is_completed(const struct BrainTrace *trace);

// # Safety
// `trace` must be NULL or a live handle.
void brain_trace_free(struct BrainTrace *trace);

// Checks a trace against the behavior rules of a repository. Writes the
// number of violations and, when `report` is not NULL, one line per
// violation (`violation RULE: evidence`).
//
// # Safety
// Handles must be live; `violations` must be writable; `report` must be
// NULL or writable.
enum BrainStatus brain_check(const struct BrainTrace *trace,
                             const struct BrainRules *rules,
                             size_t *violations,
                             char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRAIN_H */
