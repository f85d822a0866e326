#include <stdio.h>
#include "oprenewal.h"

int main(void) {
    OprOperatorSeq *op = NULL;
    if (opr_operator_power_law(2.0, 1000, &op) != OPR_STATUS_OK) return 1;

    double t[1001];
    if (opr_renewal_solve(op, 1000, t, 1001) != OPR_STATUS_OK) return 2;

    OprSpectral *s = NULL;
    double mu = 0.0;
    if (opr_spectral_new(op, &s) != OPR_STATUS_OK) return 3;
    opr_spectral_mu(s, &mu);
    printf("T_1000 = %.6f, 1/mu = %.6f\n", t[1000], 1.0 / mu);

    char msg[128];
    if (opr_renewal_solve(op, 1000, t, 10) != OPR_STATUS_BUFFER_TOO_SMALL) return 4;
    opr_last_error_message(msg, sizeof msg);
    printf("expected error: %s\n", msg);

    opr_spectral_free(s);
    opr_operator_free(op);
    return 0;
}
