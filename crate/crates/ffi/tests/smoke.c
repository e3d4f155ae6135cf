#include <math.h>
#include <stdio.h>
#include "freqlab.h"

int main(void) {
    FreqlabDctBasis *basis = NULL;
    if (freqlab_dct_basis_new(4, 4, &basis) != FREQLAB_STATUS_OK) return 1;
    double w[16], f[16], back[16];
    for (int i = 0; i < 16; i++) w[i] = (double)(i % 5) - 2.0;
    if (freqlab_dct2(basis, w, 16, f, 16) != FREQLAB_STATUS_OK) return 2;
    if (freqlab_idct2(basis, f, 16, back, 16) != FREQLAB_STATUS_OK) return 3;
    for (int i = 0; i < 16; i++)
        if (fabs(back[i] - w[i]) > 1e-12) return 4;
    if (freqlab_dct2(basis, w, 15, f, 16) != FREQLAB_STATUS_DIMENSION_MISMATCH) return 5;
    char msg[128];
    if (freqlab_last_error_message(msg, sizeof msg) == 0) return 6;
    freqlab_dct_basis_free(basis);

    FreqlabLocaParam *param = NULL;
    double a[2] = {1.0, -0.5}, rows[2] = {0.0, 2.2}, cols[2] = {1.0, 3.0};
    if (freqlab_loca_param_new(4, 4, 2.0, 2, a, rows, cols, &param) != FREQLAB_STATUS_OK) return 7;
    double dw[16];
    if (freqlab_loca_materialize(param, dw, 16) != FREQLAB_STATUS_OK) return 8;
    freqlab_loca_param_free(param);
    printf("ok %s\n", freqlab_version());
    return 0;
}
