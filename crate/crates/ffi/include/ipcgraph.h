#ifndef IPCGRAPH_H
#define IPCGRAPH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum IpcStatus {
  IPC_STATUS_OK = 0,
  IPC_STATUS_NULL_POINTER = 1,
  IPC_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed SAS, PDDL or graph input.
   */
  IPC_STATUS_PARSE_ERROR = 3,
  /**
   * Structure cap exceeded while building a lifted graph.
   */
  IPC_STATUS_LIMIT_EXCEEDED = 4,
  /**
   * Index or buffer length out of range.
   */
  IPC_STATUS_OUT_OF_RANGE = 5,
  /**
   * Runtime or probability data rejected.
   */
  IPC_STATUS_INVALID_DATA = 6,
  IPC_STATUS_INTERNAL = 7,
  IPC_STATUS_PANIC = 8,
} IpcStatus;

/**
 * Opaque graph handle.
 */
typedef struct IpcGraph IpcGraph;

/**
 * Per-graph statistics on the undirected view.
 */
typedef struct IpcGraphStats {
  uint64_t n_nodes;
  uint64_t n_edges_directed;
  uint64_t n_edges_undirected;
  double avg_degree;
  uint64_t n_components;
  /**
   * -1 when skipped because the graph exceeds the cap.
   */
  int64_t diameter;
} IpcGraphStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ipc_last_error_message(void);

/**
 * Builds the grounded graph of a SAS+ task given as text.
 *
 * # Safety
 * `sas` must be a NUL-terminated string; `out` must be writable.
 */
enum IpcStatus ipc_graph_from_sas(const char *sas, struct IpcGraph **out);

/**
 * Builds the lifted graph of a PDDL domain and problem. `max_structures`
 * of 0 selects the default cap.
 *
 * # Safety
 * `domain` and `problem` must be NUL-terminated strings; `out` must be
 * writable.
 */
enum IpcStatus ipc_graph_from_pddl(const char *domain,
                                   const char *problem,
                                   bool sharing,
                                   size_t max_structures,
                                   struct IpcGraph **out);

/**
 * Reads a graph from its JSON serialization.
 *
 * # Safety
 * `json` must point to `len` readable bytes; `out` must be writable.
 */
enum IpcStatus ipc_graph_from_json(const uint8_t *json, size_t len, struct IpcGraph **out);

/**
 * # Safety
 * `g` must be null or a handle from this library that was not yet freed.
 */
void ipc_graph_free(struct IpcGraph *g);

/**
 * Number of nodes; 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t ipc_graph_num_nodes(const struct IpcGraph *g);

/**
 * Number of directed edges; 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t ipc_graph_num_edges(const struct IpcGraph *g);

/**
 * Size of the node-kind vocabulary of the graph's family; 0 for null.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t ipc_graph_vocabulary_size(const struct IpcGraph *g);

/**
 * Edge `index` in canonical (sorted) order.
 *
 * # Safety
 * `g` must be a live handle; `src` and `dst` must be writable.
 */
enum IpcStatus ipc_graph_edge(const struct IpcGraph *g, size_t index, uint32_t *src, uint32_t *dst);

/**
 * Kind of `node` as an index into the family vocabulary.
 *
 * # Safety
 * `g` must be a live handle; `kind` must be writable.
 */
enum IpcStatus ipc_graph_node_kind(const struct IpcGraph *g, uint32_t node, uint32_t *kind);

/**
 * Writes the row-major one-hot kind matrix. `len` must equal
 * nodes x vocabulary size.
 *
 * # Safety
 * `g` must be a live handle; `buf` must point to `len` writable floats.
 */
enum IpcStatus ipc_graph_one_hot(const struct IpcGraph *g, float *buf, size_t len);

/**
 * Statistics on the undirected view; the diameter is skipped above
 * `diameter_cap` nodes.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum IpcStatus ipc_graph_stats(const struct IpcGraph *g,
                               size_t diameter_cap,
                               struct IpcGraphStats *out);

/**
 * Canonical JSON serialization, released with [`ipc_string_free`].
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum IpcStatus ipc_graph_to_json(const struct IpcGraph *g, char **out);

/**
 * # Safety
 * `s` must be null or a string from this library that was not yet freed.
 */
void ipc_string_free(char *s);

/**
 * Failure labels for `n_tasks` rows of 17 runtimes each (row-major):
 * 1 where the runtime exceeds `timeout`, else 0.
 *
 * # Safety
 * `runtimes` must point to `n_tasks * 17` doubles and `labels` to as many
 * writable bytes.
 */
enum IpcStatus ipc_binarize(const double *runtimes,
                            size_t n_tasks,
                            double timeout,
                            uint8_t *labels);

/**
 * Planner with the smallest failure probability among `len` (must be 17);
 * ties go to the lowest index.
 *
 * # Safety
 * `probabilities` must point to `len` doubles; `index` must be writable.
 */
enum IpcStatus ipc_select_planner(const double *probabilities, size_t len, size_t *index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IPCGRAPH_H */
