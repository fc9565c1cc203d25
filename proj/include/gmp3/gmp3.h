#ifndef GMP3_GMP3_H
#define GMP3_GMP3_H

#include <stddef.h>

#if defined(GMP3_BUILDING_LIBRARY)
#define GMP3_API __attribute__((visibility("default")))
#else
#define GMP3_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gmp3_status {
  GMP3_OK = 0,
  GMP3_ERR_INVALID_ARGUMENT = 1,
  GMP3_ERR_NUMERIC = 2,
  GMP3_ERR_IO = 3,
  GMP3_ERR_NOT_FOUND = 4,
  GMP3_ERR_PORT_BUSY = 5,
  GMP3_ERR_STATE = 6,
  GMP3_ERR_INTERNAL = 7
} gmp3_status;

typedef struct gmp3_scenario gmp3_scenario;
typedef struct gmp3_config gmp3_config;
typedef struct gmp3_result gmp3_result;
typedef struct gmp3_station gmp3_station;
typedef struct gmp3_drone gmp3_drone;

/* Message for the last failing call on this thread ("" when none). */
GMP3_API const char* gmp3_last_error(void);
GMP3_API const char* gmp3_status_name(gmp3_status status);
GMP3_API const char* gmp3_version(void);
/* Strings returned through char** outputs. */
GMP3_API void gmp3_string_free(char* s);

/* Comma separated: mgd,adagrad,rmsprop,adadelta,adam */
GMP3_API const char* gmp3_optimizer_kinds(void);
/* Comma separated profile names. */
GMP3_API const char* gmp3_profile_names(void);
/* Comma separated config keys accepted by gmp3_config_set. */
GMP3_API const char* gmp3_config_keys(void);

/* Scenarios */
GMP3_API gmp3_status gmp3_scenario_load(const char* path, gmp3_scenario** out);
GMP3_API gmp3_status gmp3_scenario_from_json(const char* json, gmp3_scenario** out);
GMP3_API void gmp3_scenario_free(gmp3_scenario* scenario);

/* Planner configuration */
GMP3_API gmp3_status gmp3_config_default(gmp3_config** out);
GMP3_API gmp3_status gmp3_config_from_profile(const char* profile, gmp3_config** out);
/* Applies a JSON config file on top of cfg. */
GMP3_API gmp3_status gmp3_config_load(gmp3_config* cfg, const char* path);
/* key as in the config file (dotted), value parsed as JSON or taken as text. */
GMP3_API gmp3_status gmp3_config_set(gmp3_config* cfg, const char* key, const char* value);
GMP3_API gmp3_status gmp3_config_to_json(const gmp3_config* cfg, char** out);
GMP3_API gmp3_config* gmp3_config_clone(const gmp3_config* cfg);
GMP3_API void gmp3_config_free(gmp3_config* cfg);

/* Planning. On GMP3_ERR_NUMERIC *out still holds the partial result. */
GMP3_API gmp3_status gmp3_plan(const gmp3_scenario* scenario, const gmp3_config* cfg, gmp3_result** out);

typedef struct gmp3_summary {
  double initial_loss;
  double initial_violation;
  double best_loss;
  double final_violation;
  double value;
  double max_linear_speed;
  double max_angular_rate;
  double wall_seconds;
  size_t iterations;
  size_t samples;
  double dt;
  int failed;
} gmp3_summary;

typedef enum gmp3_history {
  GMP3_HISTORY_LOSS = 0,
  GMP3_HISTORY_VIOLATION = 1,
  GMP3_HISTORY_SWEEP_LOSS = 2,
  GMP3_HISTORY_NORMALIZED_LOSS = 3,
  GMP3_HISTORY_CUMULATIVE_VIOLATION = 4
} gmp3_history;

GMP3_API gmp3_status gmp3_result_summary(const gmp3_result* result, gmp3_summary* out);
/* Pointer stays valid until gmp3_result_free. */
GMP3_API gmp3_status gmp3_result_history(const gmp3_result* result, gmp3_history which, const double** data,
                                         size_t* length);
/* out = {t, x, y, z, roll, pitch, yaw} of sample i. */
GMP3_API gmp3_status gmp3_result_sample(const gmp3_result* result, size_t i, double out[7]);
GMP3_API const char* gmp3_result_failure(const gmp3_result* result);
GMP3_API gmp3_status gmp3_result_export(const gmp3_result* result, const char* trajectory_csv,
                                        const char* metrics_csv);
GMP3_API void gmp3_result_free(gmp3_result* result);

/* Ground station */
typedef struct gmp3_station_options {
  const char* host;
  int drone_port; /* 0: any free port */
  int http_port;  /* 0: any free port */
  double telemetry_rate;
  double speed_cap;
  double fence_min[3];
  double fence_max[3];
  const char* generator;        /* "passthrough" or "gmp3" */
  const char* environment_path; /* scenario JSON for obstacles and weights; may be NULL */
} gmp3_station_options;

GMP3_API void gmp3_station_options_default(gmp3_station_options* options);
/* plan_config may be NULL (paper_rmsprop with speed clamping). */
GMP3_API gmp3_status gmp3_station_create(const gmp3_station_options* options, const gmp3_config* plan_config,
                                         gmp3_station** out);
GMP3_API gmp3_status gmp3_station_start(gmp3_station* station);
GMP3_API int gmp3_station_drone_port(const gmp3_station* station);
GMP3_API int gmp3_station_http_port(const gmp3_station* station);
GMP3_API gmp3_status gmp3_station_fleet_json(gmp3_station* station, char** out);
GMP3_API gmp3_status gmp3_station_console(gmp3_station* station, const char* line, char** out);
/* Hold setpoints, close drone links, stop threads. */
GMP3_API gmp3_status gmp3_station_stop(gmp3_station* station);
GMP3_API void gmp3_station_free(gmp3_station* station);

/* Simulated drone client */
typedef struct gmp3_drone_options {
  const char* id;
  const char* host;
  int port;
  double rate;
  double speed_cap;
  double start[3];
} gmp3_drone_options;

GMP3_API void gmp3_drone_options_default(gmp3_drone_options* options);
GMP3_API gmp3_status gmp3_drone_create(const gmp3_drone_options* options, gmp3_drone** out);
/* Blocks until the station closes the link or gmp3_drone_stop is called. */
GMP3_API gmp3_status gmp3_drone_run(gmp3_drone* drone);
/* Safe from any thread. */
GMP3_API void gmp3_drone_stop(gmp3_drone* drone);
GMP3_API size_t gmp3_drone_setpoint_count(const gmp3_drone* drone);
/* out = {t, x, y, z, yaw}; GMP3_ERR_NOT_FOUND when none was received. */
GMP3_API gmp3_status gmp3_drone_last_setpoint(const gmp3_drone* drone, double out[5]);
/* out = {x, y, z} */
GMP3_API gmp3_status gmp3_drone_position(const gmp3_drone* drone, double out[3]);
GMP3_API void gmp3_drone_free(gmp3_drone* drone);

#ifdef __cplusplus
}
#endif

#endif
