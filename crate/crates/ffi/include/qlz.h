#ifndef QLZ_H
#define QLZ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Return code of every fallible call. Zero is success.
 */
enum QlzStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  QLZ_STATUS_OK = 0,
  QLZ_STATUS_NULL_POINTER = -1,
  QLZ_STATUS_OUT_OF_RANGE = -2,
  QLZ_STATUS_INVALID_ARGUMENT = -3,
  QLZ_STATUS_FORMAT = -4,
  QLZ_STATUS_VERSION = -5,
  /*
   The caller's buffer was too small; the required size was still written.
   */
  QLZ_STATUS_BUFFER_TOO_SMALL = -6,
  QLZ_STATUS_PANIC = -7,
};
#ifndef __cplusplus
typedef int32_t QlzStatus;
#endif // __cplusplus

/*
 Result of compressing one text.
 */
typedef struct QlzCompression QlzCompression;

/*
 A compressed suffix-array index over a sentinel-terminated text.
 */
typedef struct QlzIndex QlzIndex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null if none.
 The pointer stays valid until the next failing call on the same thread.
 */
const char *qlz_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *qlz_version(void);

/*
 Factorizes `text[0..n]` through the counting oracle.

 `tau == 0` picks the block size adaptively. A text whose only `0` is its
 last symbol is treated as sentinel-terminated, which also yields the
 RLBWT run count.

 # Safety
 `text` must point to `n` readable symbols and `out_handle` to writable storage.
 */
QlzStatus qlz_compress(const uint32_t *text,
                       size_t n,
                       size_t tau,
                       struct QlzCompression **out_handle);

/*
 Number of LZ77 phrases of the compressed text.

 # Safety
 `h` must be null or a live handle from `qlz_compress`.
 */
size_t qlz_compression_z(const struct QlzCompression *h);

/*
 Number of LZ-End+tau factors found by the factorizer.

 # Safety
 As for `qlz_compression_z`.
 */
size_t qlz_compression_factors(const struct QlzCompression *h);

/*
 BWT run count, or 0 when the text was not sentinel-terminated.

 # Safety
 As for `qlz_compression_z`.
 */
size_t qlz_compression_r(const struct QlzCompression *h);

/*
 Block size of the (final) factorization round.

 # Safety
 As for `qlz_compression_z`.
 */
size_t qlz_compression_tau(const struct QlzCompression *h);

/*
 Oracle queries charged while compressing.

 # Safety
 As for `qlz_compression_z`.
 */
uint64_t qlz_compression_queries(const struct QlzCompression *h);

/*
 Expands the factorization into `buf`. `*len` receives the text length
 even when `cap` is too small.

 # Safety
 `buf` must have room for `cap` symbols; `len` must be writable.
 */
QlzStatus qlz_compression_decompress(const struct QlzCompression *h,
                                     uint32_t *buf,
                                     size_t cap,
                                     size_t *len);

/*
 # Safety
 `h` must be null or a handle from `qlz_compress` not yet freed.
 */
void qlz_compression_free(struct QlzCompression *h);

/*
 Builds an index over `text[0..n]`, appending the sentinel if absent.

 # Safety
 `text` must point to `n` readable symbols and `out_handle` to writable storage.
 */
QlzStatus qlz_index_build(const uint32_t *text, size_t n, struct QlzIndex **out_handle);

/*
 Loads an index serialized by `qlz_index_serialize` or the `qlz` CLI.

 # Safety
 `bytes` must point to `len` readable bytes and `out_handle` to writable storage.
 */
QlzStatus qlz_index_load(const uint8_t *bytes, size_t len, struct QlzIndex **out_handle);

/*
 Serializes the index. Call with `cap == 0` to learn the size.

 # Safety
 `buf` must have room for `cap` bytes; `len` must be writable.
 */
QlzStatus qlz_index_serialize(const struct QlzIndex *h, uint8_t *buf, size_t cap, size_t *len);

/*
 Length of the indexed text including the sentinel.

 # Safety
 `h` must be null or a live index handle.
 */
size_t qlz_index_len(const struct QlzIndex *h);

/*
 Number of BWT runs.

 # Safety
 As for `qlz_index_len`.
 */
size_t qlz_index_runs(const struct QlzIndex *h);

/*
 `SA[i]`.

 # Safety
 `h` must be a live index handle and `res` writable.
 */
QlzStatus qlz_index_sa(const struct QlzIndex *h, size_t i, size_t *res);

/*
 `ISA[p]`.

 # Safety
 As for `qlz_index_sa`.
 */
QlzStatus qlz_index_isa(const struct QlzIndex *h, size_t p, size_t *res);

/*
 Longest common extension of the suffixes at text positions `a` and `b`.

 # Safety
 As for `qlz_index_sa`.
 */
QlzStatus qlz_index_lce(const struct QlzIndex *h, size_t a, size_t b, size_t *res);

/*
 Occurrences of `pattern[0..m]`. Their 1-based starts go to `buf` in
 ascending order when `cap` suffices; `*count` always gets the total.
 `buf` may be null with `cap == 0` to count only.

 # Safety
 `pattern` must point to `m` symbols, `buf` to `cap` slots, `count` writable.
 */
QlzStatus qlz_index_locate(const struct QlzIndex *h,
                           const uint32_t *pattern,
                           size_t m,
                           size_t *buf,
                           size_t cap,
                           size_t *count);

/*
 # Safety
 `h` must be null or an index handle not yet freed.
 */
void qlz_index_free(struct QlzIndex *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLZ_H */
