//! C ABI for the graph-pencil library.
//!
//! Conventions:
//! - Handles (`GpParams`, `GpGraph`, `GpSolution`) are opaque pointers owned
//!   by the library; free them with the matching `*_free` function.
//! - Functions returning a pointer yield null on failure; functions
//!   returning `GpStatus` yield a nonzero code on failure. Either way
//!   `gp_last_error` describes the most recent failure on this thread.
//! - Strings are NUL-terminated UTF-8; strings returned by the library must
//!   be released with `gp_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::path::Path;
use std::ptr;

use graph_pencil::counting::CountTable;
use graph_pencil::error::Error;
use graph_pencil::pencil::{infer_sbm, EstimatedSource, ExactSource, PencilOptions};
use graph_pencil::sbm::{sample_graph, SampleConfig};
use graph_pencil::{BistarGlyph, PencilSolution, SbmParams, UndirectedGraph};

/// Status codes mirroring the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GpStatus {
    /// Success.
    Ok = 0,
    /// A null handle or malformed argument was passed.
    Usage = 2,
    /// Numerical failure (degeneracy, conditioning, non-real eigenvalues).
    Numerical = 3,
    /// File could not be read, written, or parsed.
    Io = 4,
}

/// Opaque SBM parameter set.
pub struct GpParams(SbmParams);
/// Opaque undirected graph.
pub struct GpGraph(UndirectedGraph);
/// Opaque inference result.
pub struct GpSolution(PencilSolution);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> GpStatus {
    match err.exit_code() {
        4 => GpStatus::Io,
        _ => GpStatus::Numerical,
    }
}

fn fail<T>(err: &Error) -> Option<T> {
    set_error(&err.to_string());
    None
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

unsafe fn cstr_arg<'a>(ptr: *const c_char, what: &str) -> Option<&'a str> {
    if ptr.is_null() {
        set_error(&format!("{what} is null"));
        return None;
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Some(s),
        Err(_) => {
            set_error(&format!("{what} is not valid UTF-8"));
            None
        }
    }
}

unsafe fn handle_arg<'a, T>(ptr: *const T, what: &str) -> Option<&'a T> {
    if ptr.is_null() {
        set_error(&format!("{what} is null"));
        None
    } else {
        Some(&*ptr)
    }
}

/// Build a parameter set from `pi` (length `k`) and row-major `b`
/// (`k * k` entries). Returns null on validation failure.
///
/// # Safety
/// `pi` must point to `k` doubles and `b` to `k * k` doubles.
#[no_mangle]
pub unsafe extern "C" fn gp_params_new(
    k: usize,
    pi: *const c_double,
    b: *const c_double,
) -> *mut GpParams {
    if pi.is_null() || b.is_null() || k == 0 {
        set_error("gp_params_new: null array or k == 0");
        return ptr::null_mut();
    }
    let pi = std::slice::from_raw_parts(pi, k).to_vec();
    let b: Vec<Vec<f64>> = (0..k)
        .map(|i| std::slice::from_raw_parts(b.add(i * k), k).to_vec())
        .collect();
    match SbmParams::new(pi, b) {
        Ok(params) => Box::into_raw(Box::new(GpParams(params))),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Load parameters from a JSON file `{"pi": [...], "B": [[...]]}`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gp_params_load(path: *const c_char) -> *mut GpParams {
    let Some(path) = cstr_arg(path, "path") else {
        return ptr::null_mut();
    };
    match SbmParams::load(Path::new(path)) {
        Ok(params) => Box::into_raw(Box::new(GpParams(params))),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Number of blocks.
///
/// # Safety
/// `params` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn gp_params_k(params: *const GpParams) -> c_int {
    match handle_arg(params, "params") {
        Some(p) => p.0.k() as c_int,
        None => -1,
    }
}

/// # Safety
/// `params` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gp_params_free(params: *mut GpParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Sample an `n`-node graph; deterministic in `seed`.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_sample(
    params: *const GpParams,
    n: usize,
    seed: u64,
) -> *mut GpGraph {
    let Some(p) = handle_arg(params, "params") else {
        return ptr::null_mut();
    };
    match sample_graph(&p.0, &SampleConfig { n, seed }) {
        Ok(sampled) => Box::into_raw(Box::new(GpGraph(sampled.graph))),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Load an edge-list file (`# n=<N>` header, one `u v` pair per line).
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_load(path: *const c_char) -> *mut GpGraph {
    let Some(path) = cstr_arg(path, "path") else {
        return ptr::null_mut();
    };
    match UndirectedGraph::load_edge_list(Path::new(path)) {
        Ok(graph) => Box::into_raw(Box::new(GpGraph(graph))),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Write the graph as an edge list.
///
/// # Safety
/// `graph` must be a live handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_save(
    graph: *const GpGraph,
    path: *const c_char,
) -> GpStatus {
    let (Some(g), Some(path)) = (handle_arg(graph, "graph"), cstr_arg(path, "path")) else {
        return GpStatus::Usage;
    };
    match g.0.save_edge_list(Path::new(path)) {
        Ok(()) => GpStatus::Ok,
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Node count, or -1 on a null handle.
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_n(graph: *const GpGraph) -> c_int {
    match handle_arg(graph, "graph") {
        Some(g) => g.0.n() as c_int,
        None => -1,
    }
}

/// Edge count, or -1 on a null handle.
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_edge_count(graph: *const GpGraph) -> c_int {
    match handle_arg(graph, "graph") {
        Some(g) => g.0.edge_count() as c_int,
        None => -1,
    }
}

/// # Safety
/// `graph` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_free(graph: *mut GpGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Exact model density of a glyph written in `L<l> C<c> R<r> [E]` notation.
///
/// # Safety
/// `params` must be a live handle, `glyph` a valid string, `out` non-null.
#[no_mangle]
pub unsafe extern "C" fn gp_density(
    params: *const GpParams,
    glyph: *const c_char,
    out: *mut c_double,
) -> GpStatus {
    let (Some(p), Some(spec)) = (handle_arg(params, "params"), cstr_arg(glyph, "glyph"))
    else {
        return GpStatus::Usage;
    };
    if out.is_null() {
        set_error("out is null");
        return GpStatus::Usage;
    }
    let result = spec
        .parse::<BistarGlyph>()
        .and_then(|g| graph_pencil::forward::eval_density(&p.0, &g));
    match result {
        Ok(density) => {
            *out = density.as_scalar().expect("parsed glyphs are unrooted");
            GpStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Injective-homomorphism density of a glyph in an observed graph.
///
/// # Safety
/// `graph` must be a live handle, `glyph` a valid string, `out` non-null.
#[no_mangle]
pub unsafe extern "C" fn gp_count_density(
    graph: *const GpGraph,
    glyph: *const c_char,
    out: *mut c_double,
) -> GpStatus {
    let (Some(g), Some(spec)) = (handle_arg(graph, "graph"), cstr_arg(glyph, "glyph")) else {
        return GpStatus::Usage;
    };
    if out.is_null() {
        set_error("out is null");
        return GpStatus::Usage;
    }
    let result = spec.parse::<BistarGlyph>().and_then(|gl| {
        let gl = gl.canonical();
        CountTable::for_glyph(&g.0, &gl)?.inj_hom_density(&gl)
    });
    match result {
        Ok(density) => {
            *out = density;
            GpStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

fn infer_options(two_hop: bool, clamp: bool) -> PencilOptions {
    PencilOptions {
        two_hop,
        clamp,
        ..Default::default()
    }
}

/// Infer a K-block model from an observed graph. Returns null on failure
/// (degeneracy, conditioning, or budget errors; see `gp_last_error`).
///
/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_infer(
    graph: *const GpGraph,
    k: usize,
    two_hop: bool,
    clamp: bool,
) -> *mut GpSolution {
    let Some(g) = handle_arg(graph, "graph") else {
        return ptr::null_mut();
    };
    let result = EstimatedSource::for_inference(&g.0, k, two_hop)
        .and_then(|source| infer_sbm(&source, k, &infer_options(two_hop, clamp)));
    match result {
        Ok(solution) => Box::into_raw(Box::new(GpSolution(solution))),
        Err(e) => {
            fail::<()>(&e);
            ptr::null_mut()
        }
    }
}

/// Run the pipeline on exact model densities (self-consistency check).
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_infer_exact(
    params: *const GpParams,
    k: usize,
    two_hop: bool,
) -> *mut GpSolution {
    let Some(p) = handle_arg(params, "params") else {
        return ptr::null_mut();
    };
    let source = ExactSource { params: &p.0 };
    match infer_sbm(&source, k, &infer_options(two_hop, false)) {
        Ok(solution) => Box::into_raw(Box::new(GpSolution(solution))),
        Err(e) => {
            fail::<()>(&e);
            ptr::null_mut()
        }
    }
}

/// Copy the recovered block proportions into `out` (length `k`).
///
/// # Safety
/// `solution` must be a live handle and `out` point to `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn gp_solution_pi(
    solution: *const GpSolution,
    out: *mut c_double,
    k: usize,
) -> GpStatus {
    copy_vec(solution, out, k, |s| &s.pi)
}

/// Copy the recovered block degrees into `out` (length `k`).
///
/// # Safety
/// `solution` must be a live handle and `out` point to `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn gp_solution_d(
    solution: *const GpSolution,
    out: *mut c_double,
    k: usize,
) -> GpStatus {
    copy_vec(solution, out, k, |s| &s.d)
}

unsafe fn copy_vec(
    solution: *const GpSolution,
    out: *mut c_double,
    k: usize,
    field: impl Fn(&PencilSolution) -> &Vec<f64>,
) -> GpStatus {
    let Some(s) = handle_arg(solution, "solution") else {
        return GpStatus::Usage;
    };
    let values = field(&s.0);
    if out.is_null() || k != values.len() {
        set_error(&format!("out is null or k != {}", values.len()));
        return GpStatus::Usage;
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), out, k);
    GpStatus::Ok
}

/// Copy the recovered connectivity matrix into `out`, row-major, `k * k`
/// entries.
///
/// # Safety
/// `solution` must be a live handle and `out` point to `k * k` doubles.
#[no_mangle]
pub unsafe extern "C" fn gp_solution_b(
    solution: *const GpSolution,
    out: *mut c_double,
    k: usize,
) -> GpStatus {
    let Some(s) = handle_arg(solution, "solution") else {
        return GpStatus::Usage;
    };
    if out.is_null() || k != s.0.b.len() {
        set_error(&format!("out is null or k != {}", s.0.b.len()));
        return GpStatus::Usage;
    }
    for (i, row) in s.0.b.iter().enumerate() {
        std::ptr::copy_nonoverlapping(row.as_ptr(), out.add(i * k), k);
    }
    GpStatus::Ok
}

/// Serialize the full solution (including diagnostics) to JSON. Free the
/// returned string with `gp_string_free`.
///
/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_solution_to_json(solution: *const GpSolution) -> *mut c_char {
    let Some(s) = handle_arg(solution, "solution") else {
        return ptr::null_mut();
    };
    let json = serde_json::to_string_pretty(&s.0).expect("solution serializes");
    CString::new(json).expect("JSON has no NUL bytes").into_raw()
}

/// # Safety
/// `solution` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gp_solution_free(solution: *mut GpSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// # Safety
/// `s` must come from `gp_solution_to_json`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
