use std::ffi::{c_char, CString};
use std::ptr;

use ldbem_ffi::*;

fn last_error() -> String {
    let n = ldbem_last_error_length();
    let mut buf = vec![0u8; n + 1];
    let s = unsafe { ldbem_last_error_message(buf.as_mut_ptr() as *mut c_char, buf.len()) };
    assert_eq!(s, LdbemStatus::Ok);
    buf.truncate(n);
    String::from_utf8(buf).unwrap()
}

fn rectangle(nx: usize, ny: usize, x1: f64, y1: f64) -> *mut LdbemMesh {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { ldbem_mesh_rectangle(nx, ny, 0.0, x1, 0.0, y1, &mut m) }, LdbemStatus::Ok);
    m
}

fn values(sim: *const LdbemSimulation) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut n = 0;
    assert_eq!(unsafe { ldbem_simulation_node_count(sim, &mut n) }, LdbemStatus::Ok);
    let (mut x, mut y, mut phi) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let s = unsafe { ldbem_simulation_values(sim, x.as_mut_ptr(), y.as_mut_ptr(), phi.as_mut_ptr(), n) };
    assert_eq!(s, LdbemStatus::Ok);
    (x, y, phi)
}

const CONSTANT: &str = r#"
problem = "custom"
dt = 0.1
t_end = 0.3
initial = 2.0
[scheme]
alpha = 0.5
[[bcs]]
tag = "left"
kind = "dirichlet"
value = 2.0
[[bcs]]
tag = "right"
kind = "dirichlet"
value = 2.0
[[bcs]]
tag = "bottom"
kind = "neumann"
value = 0.0
[[bcs]]
tag = "top"
kind = "neumann"
value = 0.0
"#;

#[test]
fn mesh_handles() {
    let m = rectangle(16, 16, 1.0, 1.0);
    let (mut q, mut n) = (0, 0);
    unsafe {
        assert_eq!(ldbem_mesh_quad_count(m, &mut q), LdbemStatus::Ok);
        assert_eq!(ldbem_mesh_node_count(m, &mut n), LdbemStatus::Ok);
        ldbem_mesh_free(m);
    }
    assert_eq!(q, 256);
    assert_eq!(n, 289);

    let mut a = ptr::null_mut();
    unsafe {
        assert_eq!(ldbem_mesh_annulus(4, 24, 1.0, 2.0, &mut a), LdbemStatus::Ok);
        assert_eq!(ldbem_mesh_quad_count(a, &mut q), LdbemStatus::Ok);
        ldbem_mesh_free(a);
    }
    assert_eq!(q, 96);
}

#[test]
fn mesh_import_and_errors() {
    let text = CString::new("ldbem-mesh 1\nnodes 4\n0 0\n1 0\n1 1\n0 1\nquads 1\n0 1 2 3\ntags 4\n0 0 rim\n0 1 rim\n0 2 rim\n0 3 rim\n").unwrap();
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(ldbem_mesh_import(text.as_ptr(), &mut m), LdbemStatus::Ok, "{}", last_error());
        ldbem_mesh_free(m);
    }

    let bad = CString::new("ldbem-mesh 1\nnodes 2\n0 0\n").unwrap();
    let s = unsafe { ldbem_mesh_import(bad.as_ptr(), &mut m) };
    assert_eq!(s, LdbemStatus::Mesh);
    assert!(!last_error().is_empty());

    let s = unsafe { ldbem_mesh_rectangle(0, 4, 0.0, 1.0, 0.0, 1.0, &mut m) };
    assert_eq!(s, LdbemStatus::InvalidArgument);
    assert!(last_error().contains("nx"));

    assert_eq!(unsafe { ldbem_mesh_import(ptr::null(), &mut m) }, LdbemStatus::NullPointer);
    assert_eq!(unsafe { ldbem_mesh_rectangle(1, 1, 0.0, 1.0, 0.0, 1.0, ptr::null_mut()) }, LdbemStatus::NullPointer);
    unsafe { ldbem_mesh_free(ptr::null_mut()) };
}

#[test]
fn error_clears_after_success() {
    let mut v = 0.0;
    assert_eq!(unsafe { ldbem_gamma(-1.0, &mut v) }, LdbemStatus::InvalidArgument);
    assert!(ldbem_last_error_length() > 0);
    let mut tiny = [0 as c_char; 2];
    assert_eq!(unsafe { ldbem_last_error_message(tiny.as_mut_ptr(), 2) }, LdbemStatus::BufferTooSmall);
    assert_eq!(unsafe { ldbem_gamma(5.0, &mut v) }, LdbemStatus::Ok);
    assert_eq!(ldbem_last_error_length(), 0);
}

#[test]
fn special_functions() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(ldbem_gamma(5.0, &mut v), LdbemStatus::Ok);
        assert!((v - 24.0).abs() < 1e-12);
        assert_eq!(ldbem_mittag_leffler(1.0, -2.0, &mut v), LdbemStatus::Ok);
        assert!((v - (-2.0f64).exp()).abs() < 1e-13);
        assert_eq!(ldbem_bessel(LdbemBessel::J0, 0.0, &mut v), LdbemStatus::Ok);
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(ldbem_bessel(LdbemBessel::Y0, 0.0, &mut v), LdbemStatus::InvalidArgument);
        assert_eq!(ldbem_mittag_leffler(1.5, -1.0, &mut v), LdbemStatus::InvalidArgument);
    }
}

#[test]
fn constant_field_is_preserved() {
    let m = rectangle(3, 2, 1.0, 1.0);
    let cfg = CString::new(CONSTANT).unwrap();
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(ldbem_simulation_create(cfg.as_ptr(), ptr::null(), m, &mut sim), LdbemStatus::Ok, "{}", last_error());
        ldbem_mesh_free(m);
        let mut it = 0;
        assert_eq!(ldbem_simulation_step(sim, &mut it), LdbemStatus::Ok);
        assert!(it >= 1);
        assert_eq!(ldbem_simulation_run(sim), LdbemStatus::Ok);
        let (mut done, mut total, mut t) = (0, 0, 0.0);
        assert_eq!(ldbem_simulation_steps(sim, &mut done, &mut total), LdbemStatus::Ok);
        assert_eq!((done, total), (3, 3));
        assert_eq!(ldbem_simulation_time(sim, &mut t), LdbemStatus::Ok);
        assert!((t - 0.3).abs() < 1e-12);
        assert_eq!(ldbem_simulation_step(sim, ptr::null_mut()), LdbemStatus::InvalidArgument);
    }
    let (_, _, phi) = values(sim);
    assert!(!phi.is_empty());
    for p in phi {
        assert!((p - 2.0).abs() < 1e-10, "{p}");
    }
    let mut small = [0.0; 1];
    let s = unsafe { ldbem_simulation_values(sim, ptr::null_mut(), ptr::null_mut(), small.as_mut_ptr(), 1) };
    assert_eq!(s, LdbemStatus::BufferTooSmall);
    unsafe { ldbem_simulation_free(sim) };
}

#[test]
fn registry_problem_tracks_exact_solution() {
    let alpha: f64 = 0.5;
    let m = rectangle(8, 16, 1.0, 2.0);
    let cfg = CString::new("problem = \"problem1\"\ndt = 2.5e-3\nt_end = 0.05\nreport_times = [0.05]\n").unwrap();
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(ldbem_simulation_create(cfg.as_ptr(), ptr::null(), m, &mut sim), LdbemStatus::Ok, "{}", last_error());
        ldbem_mesh_free(m);
        assert_eq!(ldbem_simulation_run(sim), LdbemStatus::Ok, "{}", last_error());
    }
    let (x, _, phi) = values(sim);
    let t: f64 = 0.05;
    let worst = x
        .iter()
        .zip(&phi)
        .map(|(&x, &p)| (p - t.powf(2.0 * alpha) * (1.0 - x * x) * (2.0 * x).exp()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 5e-3, "{worst}");
    unsafe { ldbem_simulation_free(sim) };
}

#[test]
fn config_errors_are_reported() {
    let mut sim = ptr::null_mut();
    let cfg = CString::new("problem = \"problem1\"\nt_end = 1.0\n").unwrap();
    let s = unsafe { ldbem_simulation_create(cfg.as_ptr(), ptr::null(), ptr::null(), &mut sim) };
    assert_eq!(s, LdbemStatus::Config);
    assert!(last_error().contains("dt"));
    assert!(sim.is_null());

    let cfg = CString::new("problem = \"nope\"\ndt = 0.1\n").unwrap();
    let s = unsafe { ldbem_simulation_create(cfg.as_ptr(), ptr::null(), ptr::null(), &mut sim) };
    assert_eq!(s, LdbemStatus::Config);
    assert_eq!(unsafe { ldbem_simulation_run(ptr::null_mut()) }, LdbemStatus::NullPointer);
}
