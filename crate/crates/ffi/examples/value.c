/* cc value.c -I../include ../../../target/release/libmocv_ffi.a -lm -lpthread -ldl -o value */
#include <stdio.h>
#include <stdlib.h>

#include "mocv.h"

int main(int argc, char **argv) {
    const char *path = argc > 1 ? argv[1] : "../../core/scenarios/standard.cfg";
    MocvScenario *scn = NULL;
    if (mocv_scenario_from_file(path, 9, &scn) != MOCV_STATUS_OK) {
        char msg[512];
        mocv_last_error_message(msg, sizeof msg);
        fprintf(stderr, "mocv: %s\n", msg);
        return 1;
    }
    size_t n, d, k;
    mocv_scenario_dims(scn, &n, &d, &k);
    double *x = calloc(n, sizeof *x);
    double *v = calloc(k, sizeof *v);
    if (mocv_value_thresholds(scn, 0.0, x, n, v, k) == MOCV_STATUS_OK) {
        for (size_t i = 0; i < k; i++) {
            printf("v[%zu] = %.12f\n", i, v[i]);
        }
    }
    free(x);
    free(v);
    mocv_scenario_free(scn);
    return 0;
}
