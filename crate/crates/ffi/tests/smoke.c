#include <math.h>
#include <stdio.h>
#include "pflab.h"

int main(void) {
    double v = 0.0;
    if (pflab_bridge_hit_prob(1.0, 0.0, 1.0, &v) != PFLAB_STATUS_OK || fabs(v - exp(-2.0)) > 1e-15) {
        return 1;
    }
    if (pflab_sigma_pf(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, &v) != PFLAB_STATUS_DOMAIN) {
        return 2;
    }
    if (pflab_last_error_message() == NULL) {
        return 3;
    }
    PflabLaw *law = NULL;
    if (pflab_law_g0(0.5, 1.0, &law) != PFLAB_STATUS_OK || pflab_law_total_mass(law, &v) != PFLAB_STATUS_OK) {
        return 4;
    }
    pflab_law_free(law);
    if (fabs(v - 1.0) > 1e-6) {
        return 5;
    }
    PflabRunConfig cfg = pflab_run_config_default();
    cfg.paths = 1000;
    PflabSummary *summary = NULL;
    if (pflab_run_experiment("azema-84", &cfg, &summary) != PFLAB_STATUS_OK) {
        return 6;
    }
    size_t passed = 0, failed = 0;
    pflab_summary_counts(summary, &passed, &failed);
    char *json = NULL;
    pflab_summary_json(summary, &json);
    printf("%s %zu %zu %d\n", pflab_version(), passed, failed, json != NULL);
    pflab_string_free(json);
    pflab_summary_free(summary);
    return passed > 0 ? 0 : 7;
}
