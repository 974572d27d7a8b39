#include <stdio.h>
#include <math.h>
#include "instab.h"

int main(void) {
    InstabClass cls;
    if (instab_classify(3, 1, -1, 2, &cls) != INSTAB_STATUS_OK || cls != INSTAB_CLASS_TYPE_I0) return 1;

    InstabProblem *p = NULL;
    if (instab_problem_new(INSTAB_MODEL_NAVIER_STOKES, 3, 1, -1, 2, 0.06, 0.0, &p) != INSTAB_STATUS_OK) return 2;
    InstabRoot root;
    if (instab_find_root(p, 1e-12, 0.0, &root) != INSTAB_STATUS_OK) return 3;
    double eig;
    if (instab_max_real_eig(p, 64, &eig) != INSTAB_STATUS_OK) return 4;
    if (fabs(eig - root.lambda) > 1e-8) return 5;

    InstabProblem *bad = NULL;
    if (instab_problem_new(INSTAB_MODEL_NAVIER_STOKES, 0, 0, 1, 2, 0.1, 0.0, &bad) != INSTAB_STATUS_INVALID_ARGUMENT) return 6;
    if (bad != NULL || instab_last_error_message()[0] == '\0') return 7;

    printf("%.15f %s\n", root.lambda, instab_version());
    instab_problem_free(p);
    return 0;
}
