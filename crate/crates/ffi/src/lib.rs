//! C ABI over `ipcgraph`.
//!
//! Every fallible call returns an [`IpcStatus`]; on anything other than
//! `IPC_STATUS_OK` a description is available from
//! [`ipc_last_error_message`] on the same thread. Graphs are opaque
//! [`IpcGraph`] handles released with [`ipc_graph_free`]. Strings handed
//! out by the library are released with [`ipc_string_free`].
//!
//! The header `include/ipcgraph.h` is generated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ipcgraph::asg::{assert_acyclic, build_asg, AsgOptions};
use ipcgraph::dataset::{self, TargetTable, TaskId, TaskRow, NUM_PLANNERS};
use ipcgraph::graph::{from_json, to_json, TypedDigraph};
use ipcgraph::pddl::{parse_pddl, to_abstract_structure};
use ipcgraph::pdg::build_pdg;
use ipcgraph::sas::parse_sas;
use ipcgraph::stats::graph_stats;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IpcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed SAS, PDDL or graph input.
    ParseError = 3,
    /// Structure cap exceeded while building a lifted graph.
    LimitExceeded = 4,
    /// Index or buffer length out of range.
    OutOfRange = 5,
    /// Runtime or probability data rejected.
    InvalidData = 6,
    Internal = 7,
    Panic = 8,
}

/// Opaque graph handle.
pub struct IpcGraph(TypedDigraph);

/// Per-graph statistics on the undirected view.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IpcGraphStats {
    pub n_nodes: u64,
    pub n_edges_directed: u64,
    pub n_edges_undirected: u64,
    pub avg_degree: f64,
    pub n_components: u64,
    /// -1 when skipped because the graph exceeds the cap.
    pub diameter: i64,
}

struct Failure {
    status: IpcStatus,
    message: String,
}

impl Failure {
    fn new(status: IpcStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IpcStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        Err(Failure::new(IpcStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            set_last_error("");
            IpcStatus::Ok
        }
        Err(f) => {
            set_last_error(&f.message);
            f.status
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(IpcStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(IpcStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn graph<'a>(g: *const IpcGraph) -> Result<&'a TypedDigraph, Failure> {
    g.as_ref()
        .map(|g| &g.0)
        .ok_or_else(|| Failure::new(IpcStatus::NullPointer, "graph is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(IpcStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(IpcStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn hand_out(out: &mut *mut IpcGraph, g: TypedDigraph) {
    *out = Box::into_raw(Box::new(IpcGraph(g)));
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ipc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds the grounded graph of a SAS+ task given as text.
///
/// # Safety
/// `sas` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_from_sas(sas: *const c_char, out: *mut *mut IpcGraph) -> IpcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let task = parse_sas(text(sas, "sas")?).map_err(|e| Failure::new(IpcStatus::ParseError, e.to_string()))?;
        hand_out(out, build_pdg(&task));
        Ok(())
    })
}

/// Builds the lifted graph of a PDDL domain and problem. `max_structures`
/// of 0 selects the default cap.
///
/// # Safety
/// `domain` and `problem` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_from_pddl(
    domain: *const c_char,
    problem: *const c_char,
    sharing: bool,
    max_structures: usize,
    out: *mut *mut IpcGraph,
) -> IpcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let doc = parse_pddl(text(domain, "domain")?, text(problem, "problem")?)
            .map_err(|e| Failure::new(IpcStatus::ParseError, format!("{}: {}", e.pos(), e)))?;
        let mut options = AsgOptions {
            sharing,
            ..AsgOptions::default()
        };
        if max_structures > 0 {
            options.max_structures = max_structures;
        }
        let g = build_asg(&to_abstract_structure(&doc), &options)
            .map_err(|e| Failure::new(IpcStatus::LimitExceeded, e.to_string()))?;
        assert_acyclic(&g).map_err(|e| Failure::new(IpcStatus::Internal, e.to_string()))?;
        hand_out(out, g);
        Ok(())
    })
}

/// Reads a graph from its JSON serialization.
///
/// # Safety
/// `json` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_from_json(json: *const u8, len: usize, out: *mut *mut IpcGraph) -> IpcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let g = from_json(slice(json, len, "json")?).map_err(|e| Failure::new(IpcStatus::ParseError, e.to_string()))?;
        hand_out(out, g);
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_free(g: *mut IpcGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of nodes; 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_num_nodes(g: *const IpcGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_nodes())
}

/// Number of directed edges; 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_num_edges(g: *const IpcGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.num_edges())
}

/// Size of the node-kind vocabulary of the graph's family; 0 for null.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_vocabulary_size(g: *const IpcGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.kind_vocabulary().len())
}

/// Edge `index` in canonical (sorted) order.
///
/// # Safety
/// `g` must be a live handle; `src` and `dst` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_edge(g: *const IpcGraph, index: usize, src: *mut u32, dst: *mut u32) -> IpcStatus {
    guard(|| {
        let g = graph(g)?;
        let (s, d) = (out_ref(src, "src")?, out_ref(dst, "dst")?);
        let &(a, b) = g
            .edges()
            .get(index)
            .ok_or_else(|| Failure::new(IpcStatus::OutOfRange, format!("edge {index} of {}", g.num_edges())))?;
        (*s, *d) = (a, b);
        Ok(())
    })
}

/// Kind of `node` as an index into the family vocabulary.
///
/// # Safety
/// `g` must be a live handle; `kind` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_node_kind(g: *const IpcGraph, node: u32, kind: *mut u32) -> IpcStatus {
    guard(|| {
        let g = graph(g)?;
        let kind = out_ref(kind, "kind")?;
        if node as usize >= g.num_nodes() {
            return Err(Failure::new(
                IpcStatus::OutOfRange,
                format!("node {node} of {}", g.num_nodes()),
            ));
        }
        *kind = g.kind(node).feature_index() as u32;
        Ok(())
    })
}

/// Writes the row-major one-hot kind matrix. `len` must equal
/// nodes x vocabulary size.
///
/// # Safety
/// `g` must be a live handle; `buf` must point to `len` writable floats.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_one_hot(g: *const IpcGraph, buf: *mut f32, len: usize) -> IpcStatus {
    guard(|| {
        let g = graph(g)?;
        let m = g.one_hot_features();
        if len != m.data.len() {
            return Err(Failure::new(
                IpcStatus::OutOfRange,
                format!("buffer holds {len}, need {}", m.data.len()),
            ));
        }
        if len > 0 {
            if buf.is_null() {
                return Err(Failure::new(IpcStatus::NullPointer, "buf is null"));
            }
            std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&m.data);
        }
        Ok(())
    })
}

/// Statistics on the undirected view; the diameter is skipped above
/// `diameter_cap` nodes.
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_stats(
    g: *const IpcGraph,
    diameter_cap: usize,
    out: *mut IpcGraphStats,
) -> IpcStatus {
    guard(|| {
        let g = graph(g)?;
        let out = out_ref(out, "out")?;
        let r = graph_stats("", g, diameter_cap);
        *out = IpcGraphStats {
            n_nodes: r.n_nodes as u64,
            n_edges_directed: r.n_edges_directed as u64,
            n_edges_undirected: r.n_edges_undirected as u64,
            avg_degree: r.avg_degree,
            n_components: r.n_components as u64,
            diameter: r.diameter.map_or(-1, i64::from),
        };
        Ok(())
    })
}

/// Canonical JSON serialization, released with [`ipc_string_free`].
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_graph_to_json(g: *const IpcGraph, out: *mut *mut c_char) -> IpcStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let json = CString::new(to_json(graph(g)?)).map_err(|e| Failure::new(IpcStatus::Internal, e.to_string()))?;
        *out = json.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ipc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Failure labels for `n_tasks` rows of 17 runtimes each (row-major):
/// 1 where the runtime exceeds `timeout`, else 0.
///
/// # Safety
/// `runtimes` must point to `n_tasks * 17` doubles and `labels` to as many
/// writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ipc_binarize(
    runtimes: *const f64,
    n_tasks: usize,
    timeout: f64,
    labels: *mut u8,
) -> IpcStatus {
    guard(|| {
        let len = n_tasks
            .checked_mul(NUM_PLANNERS)
            .ok_or_else(|| Failure::new(IpcStatus::OutOfRange, "n_tasks too large"))?;
        let values = slice(runtimes, len, "runtimes")?;
        let rows = values
            .chunks_exact(NUM_PLANNERS)
            .enumerate()
            .map(|(i, chunk)| TaskRow {
                id: TaskId(i.to_string()),
                domain: String::new(),
                runtimes: chunk.try_into().expect("chunk of 17"),
            })
            .collect();
        let table = TargetTable::new(rows, timeout).map_err(|e| Failure::new(IpcStatus::InvalidData, e.to_string()))?;
        if len > 0 {
            if labels.is_null() {
                return Err(Failure::new(IpcStatus::NullPointer, "labels is null"));
            }
            let out = std::slice::from_raw_parts_mut(labels, len);
            for (dst, row) in out.chunks_exact_mut(NUM_PLANNERS).zip(dataset::binarize(&table)) {
                dst.copy_from_slice(&row);
            }
        }
        Ok(())
    })
}

/// Planner with the smallest failure probability among `len` (must be 17);
/// ties go to the lowest index.
///
/// # Safety
/// `probabilities` must point to `len` doubles; `index` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ipc_select_planner(probabilities: *const f64, len: usize, index: *mut usize) -> IpcStatus {
    guard(|| {
        let index = out_ref(index, "index")?;
        *index = dataset::select_planner(slice(probabilities, len, "probabilities")?)
            .map_err(|e| Failure::new(IpcStatus::InvalidData, e.to_string()))?;
        Ok(())
    })
}
