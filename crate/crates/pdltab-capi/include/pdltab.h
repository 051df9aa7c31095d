/* C interface for the pdltab reasoner.
 *
 * Build a problem through an opaque handle, run a check, read the verdict
 * off an opaque result. All fallible functions return a PDLTAB_* status
 * code; pdltab_last_error() returns the most recent failure message of the
 * calling thread.
 */

#ifndef PDLTAB_H
#define PDLTAB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. */
#define PDLTAB_OK 0
#define PDLTAB_ERR_NULL 1
#define PDLTAB_ERR_UTF8 2
#define PDLTAB_ERR_PARSE 3
#define PDLTAB_ERR_KIND 4
#define PDLTAB_ERR_LIMIT 5
#define PDLTAB_ERR_ARG 6
#define PDLTAB_ERR_INTERNAL 7

/* ABox algorithms. */
#define PDLTAB_ALG_CACHED 0
#define PDLTAB_ALG_BACKTRACK 1

/* Instance-check encodings. */
#define PDLTAB_ENC_DIRECT 0
#define PDLTAB_ENC_FRESH_PROP 1

typedef struct PdltabProblem PdltabProblem;
typedef struct PdltabResult PdltabResult;

/* Problem construction. Formulas use the text syntax, e.g. "<s*>p & [s]q";
 * assertions are "a : <formula>" or "prog(a,b)". */
PdltabProblem *pdltab_problem_new(void);
void pdltab_problem_free(PdltabProblem *p);
int pdltab_problem_add_goal(PdltabProblem *p, const char *formula);
int pdltab_problem_add_assumption(PdltabProblem *p, const char *formula);
int pdltab_problem_add_assertion(PdltabProblem *p, const char *assertion);
void pdltab_problem_set_max_nodes(PdltabProblem *p, uint64_t max_nodes);

/* Checks. On PDLTAB_OK, *out owns a result that must be freed. */
int pdltab_check_sat(const PdltabProblem *p, PdltabResult **out);
int pdltab_check_abox_sat(const PdltabProblem *p, int algorithm, PdltabResult **out);
int pdltab_instance_check(const PdltabProblem *p, const char *var,
                          const char *formula, int encoding, PdltabResult **out);

/* Results. */
void pdltab_result_free(PdltabResult *r);
int pdltab_result_verdict(const PdltabResult *r); /* 1 sat/entailed, 0 not */
uint64_t pdltab_result_nodes(const PdltabResult *r);
uint64_t pdltab_result_iterations(const PdltabResult *r);
uint64_t pdltab_result_millis(const PdltabResult *r);
/* Serialized Kripke model for positive satisfiability verdicts, else NULL.
 * Owned by the result. */
const char *pdltab_result_model(const PdltabResult *r);

/* Diagnostics. */
const char *pdltab_last_error(void);
const char *pdltab_version(void);

#ifdef __cplusplus
}
#endif

#endif /* PDLTAB_H */
