/* Locate the trace-distance crossing for a 70 degree near state.
 *
 *   cargo build -p qmpemba-ffi
 *   cc -std=c11 -D_DEFAULT_SOURCE crates/ffi/examples/crossing.c -Icrates/ffi/include \
 *      target/debug/libqmpemba_ffi.a -lm -lpthread -ldl -o crossing
 */
#include <math.h>
#include <stdio.h>

#include "qmpemba.h"

int main(void) {
    QmSystemParams sys;
    QmBathParams bath;
    QmLiouvillian *l = NULL;
    double far[QM_STATE_LEN], near[QM_STATE_LEN], times[201];
    QmCrossing c;

    qm_experiment_params(&sys, &bath);
    if (qm_liouvillian_new(&sys, &bath, QM_COUPLING_ISING, 1, &l) != QM_STATUS_OK) {
        fprintf(stderr, "%s\n", qm_last_error());
        return 1;
    }
    qm_far_state(l, far);
    qm_near_state(l, 70.0 * M_PI / 180.0, near);
    times[0] = 0.0;
    for (int k = 0; k < 200; k++) {
        times[k + 1] = 1e-3 * pow(2e4, k / 199.0);
    }
    if (qm_mpemba_crossing(l, QM_METRIC_TRACE_DISTANCE, far, near, times, 201, &c) != QM_STATUS_OK) {
        fprintf(stderr, "%s\n", qm_last_error());
        qm_liouvillian_free(l);
        return 1;
    }
    printf("crossing at K0 t = %.9f, classification %d\n", c.time, (int)c.classification);
    qm_liouvillian_free(l);
    return 0;
}
