#include <stdio.h>
#include <stdlib.h>

#include "nfv.h"

int main(void) {
    NfvSolver *s = NULL;
    if (nfv_solver_new("encdec-nonsmooth", 24, "upwind", 0.0, 1.0, &s) != NFV_STATUS_OK) {
        char msg[256];
        nfv_last_error_message(msg, sizeof msg);
        fprintf(stderr, "create failed: %s\n", msg);
        return 1;
    }
    size_t n1 = 0, n2 = 0;
    nfv_solver_shape(s, &n1, &n2);
    double *buf = malloc(n1 * n2 * sizeof(double));
    if (nfv_solver_advance(s, 0.2, NFV_DIRECTION_FORWARD) != NFV_STATUS_OK) return 2;
    nfv_solver_get_field(s, buf, n1 * n2);
    double t = 0.0;
    nfv_solver_time(s, &t);
    printf("%zu %zu %.3f %.6f\n", n1, n2, t, buf[0]);
    if (nfv_solver_get_field(s, buf, 3) != NFV_STATUS_SHAPE_MISMATCH) return 3;
    free(buf);
    nfv_solver_free(s);
    return 0;
}
