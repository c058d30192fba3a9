#ifndef ALGOKIN_H
#define ALGOKIN_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define ALGOKIN_OK 0

#define ALGOKIN_NULL_ARGUMENT 1

#define ALGOKIN_INVALID_UTF8 2

#define ALGOKIN_PARSE_ERROR 3

#define ALGOKIN_INVALID_ALGORITHM 4

#define ALGOKIN_UNRELATED 5

#define ALGOKIN_INTERNAL_ERROR 6

// A compiled algorithm: its realization and transfer matrix.
typedef struct AlgokinAlgorithm AlgokinAlgorithm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses and compiles an algorithm from source text. With `black_box`,
// every oracle is treated as opaque. On success `*out` owns the result.
//
// # Safety
// `source` must be a NUL-terminated string and `out` valid for writes.
int32_t algokin_algorithm_parse(const char *source, bool black_box, struct AlgokinAlgorithm **out);

// Releases an algorithm. Null is ignored.
//
// # Safety
// `alg` must be null or a pointer from [`algokin_algorithm_parse`] not yet
// freed.
void algokin_algorithm_free(struct AlgokinAlgorithm *alg);

// Number of oracle calls per iteration.
//
// # Safety
// `alg` must be a live algorithm and `out` valid for writes.
int32_t algokin_algorithm_oracle_count(const struct AlgokinAlgorithm *alg, uintptr_t *out);

// The algorithm's name, as a new string.
//
// # Safety
// `alg` must be a live algorithm and `out` valid for writes. The string
// must be released with [`algokin_free_string`].
int32_t algokin_algorithm_name(const struct AlgokinAlgorithm *alg, char **out);

// The transfer matrix as JSON: `{"name": ..., "oracles": [...], "H": [[...]]}` with
// entries as strings, rows and columns in oracle call order.
//
// # Safety
// `alg` must be a live algorithm and `out` valid for writes. The string
// must be released with [`algokin_free_string`].
int32_t algokin_transfer_json(const struct AlgokinAlgorithm *alg, char **out);

// Decides how `a` and `b` are related and writes the strongest relation
// report as JSON to `*out`. Returns `ALGOKIN_UNRELATED` (still writing
// the report) when no relation holds. `max_repeat` of zero selects the
// default repetition bound.
//
// # Safety
// `a` and `b` must be live algorithms and `out` valid for writes. The
// string must be released with [`algokin_free_string`].
int32_t algokin_compare(const struct AlgokinAlgorithm *a,
                        const struct AlgokinAlgorithm *b,
                        uintptr_t max_repeat,
                        char **out);

// The message for the last failure on this thread, as a new string, or
// null if the last call succeeded.
//
// # Safety
// A non-null result must be released with [`algokin_free_string`].
char *algokin_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void algokin_free_string(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALGOKIN_H */
