/* Minimal C client. Build against the static library, e.g.
 *
 *   cargo build -p pdltab-capi
 *   cc demo.c -I include ../../target/debug/libpdltab_capi.a \
 *      -lpthread -ldl -lm -o demo
 */

#include <stdio.h>
#include <stdlib.h>

#include "pdltab.h"

static void expect(int status, const char *what) {
    if (status != PDLTAB_OK) {
        fprintf(stderr, "%s failed (%d): %s\n", what, status, pdltab_last_error());
        exit(1);
    }
}

int main(void) {
    /* An unsatisfiable goal: the eventuality <s*>p can never be realized
     * while the assumption forbids p wherever q holds along every s-path. */
    PdltabProblem *p = pdltab_problem_new();
    expect(pdltab_problem_add_goal(p, "<s*>p"), "add goal");
    expect(pdltab_problem_add_goal(p, "[s*]q"), "add goal");
    expect(pdltab_problem_add_assumption(p, "~p | ~q"), "add assumption");

    PdltabResult *r = NULL;
    expect(pdltab_check_sat(p, &r), "check");
    printf("star example: %s (%llu nodes)\n",
           pdltab_result_verdict(r) ? "SAT" : "UNSAT",
           (unsigned long long)pdltab_result_nodes(r));
    pdltab_result_free(r);
    pdltab_problem_free(p);

    /* A satisfiable goal comes back with a certifying model. */
    p = pdltab_problem_new();
    expect(pdltab_problem_add_goal(p, "<s>p & [s](p | q)"), "add goal");
    expect(pdltab_check_sat(p, &r), "check");
    printf("diamond example: %s\n", pdltab_result_verdict(r) ? "SAT" : "UNSAT");
    if (pdltab_result_model(r)) {
        printf("%s", pdltab_result_model(r));
    }
    pdltab_result_free(r);
    pdltab_problem_free(p);

    /* ABox reasoning: everything the knowledge base entails about `a`. */
    p = pdltab_problem_new();
    expect(pdltab_problem_add_assertion(p, "a : [s]p"), "add assertion");
    expect(pdltab_problem_add_assertion(p, "s(a,b)"), "add assertion");
    expect(pdltab_instance_check(p, "b", "p", PDLTAB_ENC_DIRECT, &r), "instance");
    printf("b : p is %s\n", pdltab_result_verdict(r) ? "entailed" : "not entailed");
    pdltab_result_free(r);
    pdltab_problem_free(p);

    return 0;
}
