#ifndef CRYPTRIAGE_H
#define CRYPTRIAGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_NULL_ARGUMENT = 1,
  CT_STATUS_INVALID_UTF8 = 2,
  CT_STATUS_RULE_PACK = 3,
  CT_STATUS_THREAT_MODEL = 4,
  CT_STATUS_PARSE = 5,
  CT_STATUS_IO = 6,
  CT_STATUS_PANIC = 7,
} CtStatus;

/**
 * Severity threshold for [`ct_report_exit_code`].
 */
typedef enum CtFailOn {
  CT_FAIL_ON_HIGH = 0,
  CT_FAIL_ON_MEDIUM = 1,
  CT_FAIL_ON_LOW = 2,
  CT_FAIL_ON_NEVER = 3,
} CtFailOn;

/**
 * A finished scan with its rendered JSON cached.
 */
typedef struct CtReport CtReport;

/**
 * Loaded rules, threat model and settings.
 */
typedef struct CtScanner CtScanner;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *ct_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *ct_version(void);

/**
 * Create a scanner. `rules_dir` and `threat_model_path` may be null to use
 * the built-in pack and catalog.
 *
 * # Safety
 * String arguments must be null or valid NUL-terminated strings; `out` must
 * be a valid pointer.
 */
enum CtStatus ct_scanner_new(const char *rules_dir,
                             const char *threat_model_path,
                             struct CtScanner **out);

/**
 * # Safety
 * `scanner` must be null or a handle from [`ct_scanner_new`] not yet freed.
 */
void ct_scanner_free(struct CtScanner *scanner);

/**
 * Set the helper inlining depth (default 1) and worker count (0 = all
 * cores).
 *
 * # Safety
 * `scanner` must be a live handle.
 */
enum CtStatus ct_scanner_configure(struct CtScanner *scanner, size_t inline_depth, size_t jobs);

/**
 * Scan one in-memory Java source. `path` names the unit in the report.
 *
 * # Safety
 * `scanner` must be a live handle, strings valid, `out` a valid pointer.
 */
enum CtStatus ct_scan_source(const struct CtScanner *scanner,
                             const char *source,
                             const char *path,
                             struct CtReport **out);

/**
 * Scan files and directories.
 *
 * # Safety
 * `paths` must point to `count` valid strings.
 */
enum CtStatus ct_scan_paths(const struct CtScanner *scanner,
                            const char *const *paths,
                            size_t count,
                            struct CtReport **out);

/**
 * # Safety
 * `report` must be null or a live report handle.
 */
void ct_report_free(struct CtReport *report);

/**
 * Number of findings, or 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
size_t ct_report_finding_count(const struct CtReport *report);

/**
 * The JSON report, owned by the handle.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
const char *ct_report_json(const struct CtReport *report);

/**
 * The text summary, rendered on first use and owned by the handle.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
const char *ct_report_text(struct CtReport *report);

/**
 * Exit code the CLI would return: 0, 1 for findings at or above the
 * threshold, or -1 for a null handle.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
int32_t ct_report_exit_code(const struct CtReport *report, enum CtFailOn fail_on, bool demote_efp);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRYPTRIAGE_H */
