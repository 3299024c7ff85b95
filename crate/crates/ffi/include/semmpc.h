#ifndef SEMMPC_H
#define SEMMPC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SemmpcStatus {
  SEMMPC_STATUS_OK = 0,
  SEMMPC_STATUS_NULL_POINTER = 1,
  SEMMPC_STATUS_INVALID_UTF8 = 2,
  // Graph or query text did not parse.
  SEMMPC_STATUS_PARSE = 3,
  // The graph lacks or contradicts something the controller needs.
  SEMMPC_STATUS_DERIVE = 4,
  // An argument is out of range.
  SEMMPC_STATUS_INVALID_ARGUMENT = 5,
  SEMMPC_STATUS_IO = 6,
  SEMMPC_STATUS_SIMULATION = 7,
  SEMMPC_STATUS_SOLVER = 8,
  SEMMPC_STATUS_PANIC = 9,
} SemmpcStatus;

// Opaque parsed graph.
typedef struct SemmpcGraph SemmpcGraph;

// Opaque controller setup derived from a graph.
typedef struct SemmpcSetup SemmpcSetup;

// RC parameters: capacitance J/K, resistance K/W, solar aperture m².
typedef struct SemmpcTheta {
  double c_z;
  double r_w;
  double alpha;
} SemmpcTheta;

typedef struct SemmpcHyper {
  // s
  double dt;
  size_t n_c;
  size_t n_t;
  size_t n_s;
  // K
  double rho;
} SemmpcHyper;

// One step of exogenous inputs. Temperatures in K.
typedef struct SemmpcDisturbance {
  double t_amb;
  // W/m²
  double h_glo;
  // W/m²
  double q_int;
  // currency per kWh
  double price;
  bool occupied;
} SemmpcDisturbance;

typedef struct SemmpcMetrics {
  size_t steps;
  double total_cost;
  double comfort_violation_kh;
  double energy_kwh;
  size_t si_eligible_steps;
  size_t si_activations;
  size_t mpc_fallbacks;
  struct SemmpcTheta final_theta;
} SemmpcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *semmpc_last_error(void);

// Releases a string returned by this library.
void semmpc_string_free(char *s);

// Parses a Turtle document.
enum SemmpcStatus semmpc_graph_parse(const char *text, struct SemmpcGraph **out);

// Reads and parses a Turtle file.
enum SemmpcStatus semmpc_graph_load(const char *path, struct SemmpcGraph **out);

// The bundled office test zone model.
enum SemmpcStatus semmpc_graph_bestest(struct SemmpcGraph **out);

void semmpc_graph_free(struct SemmpcGraph *g);

// Number of distinct triples.
enum SemmpcStatus semmpc_graph_len(const struct SemmpcGraph *g, size_t *out);

// Number of solution rows of a SELECT query. The graph's prefixes are in
// scope.
enum SemmpcStatus semmpc_graph_query_count(const struct SemmpcGraph *g,
                                           const char *query,
                                           size_t *out);

// Derives the controller setup. `zone` may be null when the graph holds a
// single zone.
enum SemmpcStatus semmpc_setup_derive(const struct SemmpcGraph *g,
                                      const char *zone,
                                      struct SemmpcSetup **out);

void semmpc_setup_free(struct SemmpcSetup *s);

// Initial parameter guess and its box bounds. `lower` and `upper` may be
// null.
enum SemmpcStatus semmpc_setup_theta0(const struct SemmpcSetup *s,
                                      struct SemmpcTheta *theta0,
                                      struct SemmpcTheta *lower,
                                      struct SemmpcTheta *upper);

// Nominal powers (W, cooling negative) and efficiencies, four entries each
// in the order cooling coil, heating coil, reheat coil, radiator.
enum SemmpcStatus semmpc_setup_hvac(const struct SemmpcSetup *s, double *q_max, double *gamma);

enum SemmpcStatus semmpc_setup_hyper(const struct SemmpcSetup *s, struct SemmpcHyper *out);

// The whole setup as JSON; release with [`semmpc_string_free`].
enum SemmpcStatus semmpc_setup_to_json(const struct SemmpcSetup *s, char **out);

// Net thermal HVAC power for controls `u[4]`, W.
enum SemmpcStatus semmpc_hvac_power(const struct SemmpcSetup *s, const double *u, double *out);

// Advances the 1R1C model by `dt` seconds from `t_zone` (K).
enum SemmpcStatus semmpc_step_rc(const struct SemmpcSetup *s,
                                 const struct SemmpcTheta *theta,
                                 double t_zone,
                                 const double *u,
                                 const struct SemmpcDisturbance *e,
                                 double dt,
                                 double *out);

// Solves the MPC problem over the `n` forecast steps starting at `start`
// (seconds since 1970-01-01 00:00 on the building's local clock) and
// writes the first control vector to `u_out[4]`. `objective` may be null.
enum SemmpcStatus semmpc_mpc_first_action(const struct SemmpcSetup *s,
                                          const struct SemmpcTheta *theta,
                                          double t_zone,
                                          int64_t start,
                                          const struct SemmpcDisturbance *forecast,
                                          size_t n,
                                          double mu,
                                          double *u_out,
                                          double *objective);

// Runs a closed-loop scenario given as TOML text. Relative paths in the
// scenario resolve against `base_dir` (null for the working directory).
// When `out_dir` is non-null, `trace.csv` and `metrics.json` are written
// there.
enum SemmpcStatus semmpc_run_scenario(const char *scenario_toml,
                                      const char *base_dir,
                                      const char *out_dir,
                                      struct SemmpcMetrics *metrics);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMMPC_H */
