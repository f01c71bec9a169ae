#include <stdio.h>
#include <string.h>
#include "ccnsim.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "line %d: %s\n", __LINE__, #cond); return 1; } } while (0)

int main(void) {
    CcnTopology *topo = NULL;
    CcnScenario *sc = NULL;
    CcnReport *report = NULL;
    double ratio = -1.0, saved = 0.0;

    CHECK(ccn_topology_builtin("abilene", &topo) == CCN_STATUS_OK);
    CHECK(ccn_topology_node_count(topo) == 11);
    CHECK(ccn_scenario_new(&sc) == CCN_STATUS_OK);
    CHECK(ccn_scenario_set(sc, "catalog_size", "100") == CCN_STATUS_OK);
    CHECK(ccn_scenario_set(sc, "duration", "200") == CCN_STATUS_OK);
    CHECK(ccn_scenario_set(sc, "strategy", "bogus") == CCN_STATUS_INVALID_ARGUMENT);
    char *msg = ccn_last_error();
    CHECK(msg != NULL && strstr(msg, "strategy") != NULL);
    ccn_string_free(msg);

    CHECK(ccn_run(sc, topo, &report) == CCN_STATUS_OK);
    CHECK(ccn_report_cache_hit_ratio(report, &ratio) == CCN_STATUS_OK);
    CHECK(ratio >= 0.0 && ratio <= 1.0);
    CcnCounters counters;
    CHECK(ccn_report_counters(report, &counters) == CCN_STATUS_OK);
    CHECK(counters.cache_hits + counters.cache_misses == counters.chunk_interests);
    char *row = ccn_report_csv_row(report);
    CHECK(row != NULL);
    printf("%s\n%s\n", ccn_csv_header(), row);
    ccn_string_free(row);

    CHECK(ccn_traffic_savings(8600.0, 0.027, &saved) == CCN_STATUS_OK);
    CHECK(saved > 232.19 && saved < 232.21);

    ccn_report_free(report);
    ccn_scenario_free(sc);
    ccn_topology_free(topo);
    return 0;
}
