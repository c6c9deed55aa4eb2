#include <stdio.h>
#include <stdlib.h>
#include "peerlab.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        PeerlabStatus st_ = (call);                                        \
        if (st_ != PEERLAB_STATUS_OK) {                                    \
            const char *m_ = peerlab_last_error_message();                 \
            fprintf(stderr, "%s -> %d: %s\n", #call, st_, m_ ? m_ : "");   \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    const char *json =
        "{\"env\": {\"type\": \"room\", \"size\": 5}, \"agents\": [\"learner\", \"learner\"],"
        " \"total_steps\": 600, \"eval_interval\": 300, \"eval_episodes\": 2}";
    PeerlabConfig *cfg = NULL;
    CHECK(peerlab_config_from_json(json, &cfg));

    PeerlabRun *run = NULL;
    CHECK(peerlab_run(cfg, 5, &run));
    peerlab_config_free(cfg);

    double score = 0.0;
    size_t n = 0, len = 0;
    CHECK(peerlab_run_score(run, &score));
    CHECK(peerlab_run_member_count(run, &n));

    if (peerlab_run_curve(run, 0, NULL, 0, &len) != PEERLAB_STATUS_BUFFER_TOO_SMALL) {
        fprintf(stderr, "expected BUFFER_TOO_SMALL\n");
        return 1;
    }
    double *curve = malloc(len * sizeof *curve);
    CHECK(peerlab_run_curve(run, 0, curve, len, &len));

    printf("version %s members %zu checkpoints %zu score %.6f last %.6f\n",
           peerlab_version(), n, len, score, curve[len - 1]);
    free(curve);
    peerlab_run_free(run);

    if (peerlab_config_from_json("{\"gama\": 1}", &cfg) != PEERLAB_STATUS_INVALID_CONFIG) return 1;
    printf("error: %s\n", peerlab_last_error_message());
    return 0;
}
