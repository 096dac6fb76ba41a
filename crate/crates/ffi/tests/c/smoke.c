#include <math.h>
#include <stdio.h>
#include "prodtail.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "check failed: %s (line %d)\n", #cond, __LINE__); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    PtLogProb p;
    CHECK(pt_tail_exact(0.01, 1.0, &p) == PT_STATUS_OK);
    CHECK(fabs(p.p - 0.0308961353514575) < 1e-12);

    CHECK(pt_tail_exact(0.01, -1.0, &p) == PT_STATUS_INVALID_PARAMETER);
    CHECK(pt_last_error_message() != NULL);
    CHECK(pt_tail_exact(0.01, 1.0, NULL) == PT_STATUS_NULL_POINTER);

    PtStream *s = pt_stream_new(7);
    CHECK(s != NULL);
    PtXSample x[16];
    CHECK(pt_sample_many(s, PT_METHOD_COMPOUND, 1.0, 0.0, 16, x) == PT_STATUS_OK);
    for (int i = 0; i < 16; i++) CHECK(x[i].value > 0.0 && x[i].value <= 1.0);

    size_t parents[3] = {1, 1, 1};
    PtTree *star = NULL;
    CHECK(pt_tree_from_parents(parents, 3, &star) == PT_STATUS_OK);
    double phi[4];
    CHECK(pt_tree_log_phi_all(star, phi, 4) == PT_STATUS_OK);
    CHECK(fabs(phi[0]) < 1e-12 && fabs(phi[3] - log(3.0)) < 1e-12);
    size_t top;
    CHECK(pt_tree_top_k(star, 1, &top) == PT_STATUS_OK && top == 1);
    pt_tree_free(star);

    PtTrialRecord r;
    CHECK(pt_root_finding_trial(50, 50, 4, s, &r) == PT_STATUS_OK);
    CHECK(r.successes == 4 && r.has_std_error);
    pt_stream_free(s);

    printf("ok %s\n", pt_version());
    return 0;
}
