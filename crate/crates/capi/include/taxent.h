/* C interface to the taxent classifier.
 *
 * Load a model directory built by the `taxent build` command, then classify
 * text or look up entity attachments. All handles are opaque; free them with
 * the matching *_free function. Functions returning TaxentStatus leave a
 * human-readable message for the most recent failure in taxent_last_error().
 */

#ifndef TAXENT_H
#define TAXENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call in this library.
typedef enum {
  // The call succeeded.
  TAXENT_OK = 0,
  // A required pointer argument was null.
  TAXENT_ERR_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  TAXENT_ERR_INVALID_UTF8 = 2,
  // The model directory could not be loaded or failed verification.
  TAXENT_ERR_MODEL = 3,
  // A numeric argument was out of range.
  TAXENT_ERR_INVALID_PARAMETER = 4,
  // The requested entity has no attachment in the model.
  TAXENT_ERR_NOT_FOUND = 5,
  // The library caught an internal panic.
  TAXENT_ERR_INTERNAL = 6,
} TaxentStatus;

// Opaque handle to a loaded classifier model.
typedef struct TaxentModel TaxentModel;

// Opaque ranked list of (category path, score) rows.
typedef struct TaxentRanking TaxentRanking;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent error on this thread, or null if none has
// occurred. The pointer stays valid until the next failing call on the
// same thread.
const char *taxent_last_error(void);

// Loads and verifies a model directory. On success stores a handle in
// `out_model`; free it with taxent_model_free().
//
// # Safety
// `dir` must be a nul-terminated string and `out_model` a valid pointer.
TaxentStatus taxent_model_load(const char *dir, TaxentModel **out_model);

// Frees a model handle. Null is ignored.
//
// # Safety
// `model` must have come from taxent_model_load() and not be freed twice.
void taxent_model_free(TaxentModel *model);

// Number of categories in the model's taxonomy; 0 for a null handle.
//
// # Safety
// `model` must be a live handle from taxent_model_load() or null.
size_t taxent_model_category_count(const TaxentModel *model);

// Classifies `text` and stores the top-`k` ranking in `out_ranking`;
// free it with taxent_ranking_free().
//
// # Safety
// `model` must be a live handle, `text` a nul-terminated string, and
// `out_ranking` a valid pointer.
TaxentStatus taxent_model_classify(const TaxentModel *model,
                                   const char *text,
                                   size_t k,
                                   TaxentRanking **out_ranking);

// Looks up the stored attachment ranking of `entity`; stores it in
// `out_ranking` on success. Entities absent from the model yield
// TAXENT_ERR_NOT_FOUND.
//
// # Safety
// `model` must be a live handle, `entity` a nul-terminated string, and
// `out_ranking` a valid pointer.
TaxentStatus taxent_model_attachment(const TaxentModel *model,
                                     const char *entity,
                                     TaxentRanking **out_ranking);

// Frees a ranking handle. Null is ignored.
//
// # Safety
// `ranking` must have come from this library and not be freed twice.
void taxent_ranking_free(TaxentRanking *ranking);

// Number of rows in a ranking; 0 for a null handle.
//
// # Safety
// `ranking` must be a live handle or null.
size_t taxent_ranking_len(const TaxentRanking *ranking);

// Category path of row `index`, or null when the handle is null or the
// index is out of range. The pointer stays valid until the ranking is
// freed.
//
// # Safety
// `ranking` must be a live handle or null.
const char *taxent_ranking_path(const TaxentRanking *ranking, size_t index);

// Score of row `index`; NaN when the handle is null or the index is out
// of range.
//
// # Safety
// `ranking` must be a live handle or null.
double taxent_ranking_score(const TaxentRanking *ranking, size_t index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAXENT_H */
