//! C ABI for the ldbem solver.
//!
//! Every function returns an [`LdbemStatus`]. On failure the message is kept
//! in a thread-local slot readable through [`ldbem_last_error_message`].
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ldbem::cli::{parse_config, CliError};
use ldbem::driver::Simulation;
use ldbem::mesh::{self, Mesh};
use ldbem::reference::special::{self, BesselKind};
use ldbem::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LdbemStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Mesh = 4,
    Numerical = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LdbemBessel {
    J0 = 0,
    J1 = 1,
    Y0 = 2,
    Y1 = 3,
}

/// Opaque mesh handle.
pub struct LdbemMesh {
    inner: Mesh,
}

/// Opaque simulation handle.
pub struct LdbemSimulation {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: LdbemStatus, msg: impl Into<String>) -> LdbemStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> LdbemStatus {
    match e {
        Error::InvalidArgument(_) => LdbemStatus::InvalidArgument,
        Error::Parse { .. } | Error::Mesh(_) | Error::DegenerateQuad(_) | Error::ZeroLengthEdge => LdbemStatus::Mesh,
        Error::Config(_) => LdbemStatus::Config,
        Error::Io(_) => LdbemStatus::Io,
        _ => LdbemStatus::Numerical,
    }
}

fn from_error(e: Error) -> LdbemStatus {
    fail(status_of(&e), e.to_string())
}

fn from_cli(e: CliError) -> LdbemStatus {
    match e {
        CliError::Config(m) => fail(LdbemStatus::Config, m),
        CliError::Runtime(m) => fail(LdbemStatus::Numerical, m),
    }
}

fn guard(f: impl FnOnce() -> LdbemStatus) -> LdbemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == LdbemStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(LdbemStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, LdbemStatus> {
    if p.is_null() {
        return Err(fail(LdbemStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LdbemStatus::InvalidArgument, format!("{name} is not valid UTF-8")))
}

fn put<T>(out: *mut *mut T, value: T) -> LdbemStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    LdbemStatus::Ok
}

fn put_mesh(out: *mut *mut LdbemMesh, m: ldbem::Result<Mesh>) -> LdbemStatus {
    match m {
        Ok(inner) => put(out, LdbemMesh { inner }),
        Err(e) => from_error(e),
    }
}

macro_rules! check_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(LdbemStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Length in bytes of the last error message on this thread, excluding the
/// terminating NUL. Zero after a successful call.
#[no_mangle]
pub extern "C" fn ldbem_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message (NUL-terminated) into `buf`.
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ldbem_last_error_message(buf: *mut c_char, len: usize) -> LdbemStatus {
    if buf.is_null() {
        return LdbemStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if msg.len() + 1 > len {
            return LdbemStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, msg.len());
        *buf.add(msg.len()) = 0;
        LdbemStatus::Ok
    })
}

/// Structured rectangle mesh with edge tags left/right/bottom/top.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_mesh_rectangle(
    nx: usize,
    ny: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    out: *mut *mut LdbemMesh,
) -> LdbemStatus {
    check_null!(out);
    guard(|| put_mesh(out, mesh::generate_rectangle(nx, ny, (x0, x1), (y0, y1))))
}

/// Structured annulus mesh with edge tags inner/outer.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_mesh_annulus(
    nr: usize,
    ntheta: usize,
    r_in: f64,
    r_out: f64,
    out: *mut *mut LdbemMesh,
) -> LdbemStatus {
    check_null!(out);
    guard(|| put_mesh(out, mesh::generate_annulus(nr, ntheta, r_in, r_out)))
}

/// Disk mesh with edge tag "rim".
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_mesh_disk(
    n_core: usize,
    n_ring: usize,
    radius: f64,
    out: *mut *mut LdbemMesh,
) -> LdbemStatus {
    check_null!(out);
    guard(|| put_mesh(out, mesh::generate_disk(n_core, n_ring, radius)))
}

/// Parses a mesh from its text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_mesh_import(text: *const c_char, out: *mut *mut LdbemMesh) -> LdbemStatus {
    check_null!(out);
    guard(|| match str_arg(text, "text") {
        Ok(t) => put_mesh(out, mesh::import_mesh(t)),
        Err(s) => s,
    })
}

/// # Safety
/// `mesh` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_mesh_quad_count(mesh: *const LdbemMesh, out: *mut usize) -> LdbemStatus {
    check_null!(mesh, out);
    *out = (*mesh).inner.quad_count();
    guard(|| LdbemStatus::Ok)
}

/// # Safety
/// `mesh` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_mesh_node_count(mesh: *const LdbemMesh, out: *mut usize) -> LdbemStatus {
    check_null!(mesh, out);
    *out = (*mesh).inner.nodes.len();
    guard(|| LdbemStatus::Ok)
}

/// # Safety
/// `mesh` must be null or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ldbem_mesh_free(mesh: *mut LdbemMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Builds a simulation from a TOML run configuration. Relative mesh paths
/// resolve against `base_dir` (the current directory when null). When
/// `mesh` is not null it replaces the configured mesh.
///
/// # Safety
/// `config` must be a NUL-terminated string, `base_dir` null or
/// NUL-terminated, `mesh` null or a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_simulation_create(
    config: *const c_char,
    base_dir: *const c_char,
    mesh: *const LdbemMesh,
    out: *mut *mut LdbemSimulation,
) -> LdbemStatus {
    check_null!(out);
    guard(|| {
        let text = match str_arg(config, "config") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let base = if base_dir.is_null() {
            "."
        } else {
            match str_arg(base_dir, "base_dir") {
                Ok(b) => b,
                Err(s) => return s,
            }
        };
        let supplied = if mesh.is_null() { None } else { Some((*mesh).inner.clone()) };
        let plan = match parse_config(text).and_then(|c| c.resolve_with_mesh(Path::new(base), supplied)) {
            Ok(p) => p,
            Err(e) => return from_cli(e),
        };
        match Simulation::new(plan.sim, plan.mesh, plan.problem) {
            Ok(inner) => put(out, LdbemSimulation { inner }),
            Err(e) => from_error(e),
        }
    })
}

/// Advances one time step. `iterations` (nullable) receives the number of
/// nonlinear iterations used.
///
/// # Safety
/// `sim` must be a live handle; `iterations` null or valid.
#[no_mangle]
pub unsafe extern "C" fn ldbem_simulation_step(sim: *mut LdbemSimulation, iterations: *mut usize) -> LdbemStatus {
    check_null!(sim);
    guard(|| {
        let s = &mut (*sim).inner;
        if s.state.n >= s.config.step_count() {
            return fail(LdbemStatus::InvalidArgument, "simulation already reached t_end");
        }
        match s.advance_one_step() {
            Ok(r) => {
                if !iterations.is_null() {
                    *iterations = r.iterations;
                }
                LdbemStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Advances to `t_end`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ldbem_simulation_run(sim: *mut LdbemSimulation) -> LdbemStatus {
    check_null!(sim);
    guard(|| match (*sim).inner.run(|_, _| Ok(())) {
        Ok(()) => LdbemStatus::Ok,
        Err(e) => from_error(e),
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_simulation_time(sim: *const LdbemSimulation, out: *mut f64) -> LdbemStatus {
    check_null!(sim, out);
    *out = (*sim).inner.time();
    guard(|| LdbemStatus::Ok)
}

/// Completed and total step counts.
///
/// # Safety
/// `sim` must be a live handle; `done` and `total` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ldbem_simulation_steps(
    sim: *const LdbemSimulation,
    done: *mut usize,
    total: *mut usize,
) -> LdbemStatus {
    check_null!(sim, done, total);
    *done = (*sim).inner.state.n;
    *total = (*sim).inner.config.step_count();
    guard(|| LdbemStatus::Ok)
}

/// Number of output nodes (boundary nodes followed by cell nodes).
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_simulation_node_count(sim: *const LdbemSimulation, out: *mut usize) -> LdbemStatus {
    check_null!(sim, out);
    guard(|| {
        *out = (*sim).inner.nodal_values().len();
        LdbemStatus::Ok
    })
}

/// Copies node coordinates and values. Each buffer must hold `len` doubles,
/// with `len` at least the node count. `x` and `y` may be null.
///
/// # Safety
/// `sim` must be a live handle; non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ldbem_simulation_values(
    sim: *const LdbemSimulation,
    x: *mut f64,
    y: *mut f64,
    phi: *mut f64,
    len: usize,
) -> LdbemStatus {
    check_null!(sim, phi);
    guard(|| {
        let nodes = (*sim).inner.nodal_values();
        if len < nodes.len() {
            return fail(LdbemStatus::BufferTooSmall, format!("need {} values, buffer holds {len}", nodes.len()));
        }
        for (i, n) in nodes.iter().enumerate() {
            *phi.add(i) = n.phi;
            if !x.is_null() {
                *x.add(i) = n.point.x;
            }
            if !y.is_null() {
                *y.add(i) = n.point.y;
            }
        }
        LdbemStatus::Ok
    })
}

/// # Safety
/// `sim` must be null or a handle returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ldbem_simulation_free(sim: *mut LdbemSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

fn put_value(out: *mut f64, v: ldbem::Result<f64>) -> LdbemStatus {
    match v {
        Ok(v) => {
            unsafe { *out = v };
            LdbemStatus::Ok
        }
        Err(e) => from_error(e),
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_gamma(x: f64, out: *mut f64) -> LdbemStatus {
    check_null!(out);
    guard(|| put_value(out, special::gamma_fn(x)))
}

/// One-parameter Mittag-Leffler function E_alpha(z) for real z <= 0.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_mittag_leffler(alpha: f64, z: f64, out: *mut f64) -> LdbemStatus {
    check_null!(out);
    guard(|| put_value(out, special::mittag_leffler(alpha, z)))
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ldbem_bessel(kind: LdbemBessel, x: f64, out: *mut f64) -> LdbemStatus {
    check_null!(out);
    let k = match kind {
        LdbemBessel::J0 => BesselKind::J0,
        LdbemBessel::J1 => BesselKind::J1,
        LdbemBessel::Y0 => BesselKind::Y0,
        LdbemBessel::Y1 => BesselKind::Y1,
    };
    guard(|| put_value(out, special::bessel(k, x)))
}
