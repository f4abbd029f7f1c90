#include <math.h>
#include <stdio.h>
#include "shielding.h"

int main(void) {
    ShieldingComplex z = {0.0, 0.5};
    ShieldingComplex c = {1.0, 0.0};
    ShieldingSpectrum *s = NULL;
    if (shielding_spectrum_new(&z, &c, 1, &s) != SHIELDING_OK) {
        fprintf(stderr, "spectrum_new: %s\n", shielding_last_error());
        return 1;
    }
    ShieldingComplex psi, exact;
    if (shielding_evaluate_psi(s, 0.3, 0.1, &psi, NULL) != SHIELDING_OK) return 2;
    if (shielding_one_soliton(z, c, 0.3, 0.1, &exact) != SHIELDING_OK) return 3;
    shielding_spectrum_free(s);
    if (hypot(psi.re - exact.re, psi.im - exact.im) > 1e-12) return 4;

    ShieldingComplex bad = {0.0, -1.0};
    int rc = shielding_spectrum_new(&bad, &c, 1, &s);
    if (rc <= 0 || shielding_last_error() == NULL) return 5;

    printf("ok %s |psi| = %.12f\n", shielding_version(), hypot(psi.re, psi.im));
    return 0;
}
