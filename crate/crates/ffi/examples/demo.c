/* Build: cargo build -p momip-ffi --release
 *        cc examples/demo.c -Iinclude ../../target/release/libmomip_ffi.a -lpthread -ldl -lm -o demo */
#include <stdio.h>
#include "momip.h"

int main(void) {
    MomipProblem *p = NULL;
    if (momip_problem_new(MOMIP_PROBLEM_KIND_EXAMPLE2, &p) != MOMIP_STATUS_OK) {
        fprintf(stderr, "%s\n", momip_last_error());
        return 1;
    }
    double alpha[2] = {2.1412, 2.0705};
    MomipEvaluation ev;
    if (momip_evaluate(p, alpha, 2, 1e-7, &ev, NULL, 0) != MOMIP_STATUS_OK) {
        fprintf(stderr, "%s\n", momip_last_error());
        momip_problem_free(p);
        return 1;
    }
    printf("feasible=%d lambda*=%.6e\n", ev.feasible, ev.lambda_star);
    momip_problem_free(p);
    return 0;
}
