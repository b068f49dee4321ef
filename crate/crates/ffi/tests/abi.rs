use std::ffi::CStr;
use std::path::PathBuf;
use std::ptr;

use strichlab_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let mut len = 0usize;
    unsafe { sl_last_error(buf.as_mut_ptr(), buf.len(), &mut len) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn airy_values_and_zeros() {
    let mut v = 0.0;
    assert_eq!(unsafe { sl_airy_ai(0.0, &mut v) }, SlStatus::Ok);
    assert!((v - 0.355_028_053_887_817_2).abs() < 1e-14);
    let mut zeros = [0.0; 3];
    assert_eq!(unsafe { sl_airy_zeros(3, zeros.as_mut_ptr()) }, SlStatus::Ok);
    assert!((zeros[0] - 2.338_107_410_459_767).abs() < 1e-12);
    assert_eq!(unsafe { sl_airy_zeros(0, zeros.as_mut_ptr()) }, SlStatus::InvalidArgument);
    assert_eq!(unsafe { sl_airy_ai(f64::NAN, &mut v) }, SlStatus::InvalidArgument);
    assert_eq!(unsafe { sl_airy_ai(1.0, ptr::null_mut()) }, SlStatus::NullPointer);
}

#[test]
fn loss_exponent_at_six() {
    let mut b = 0.0;
    assert_eq!(unsafe { sl_loss_exponent(6.0, &mut b) }, SlStatus::Ok);
    // 3/2 (1/2 - 1/6) + 1/6 (1/4 - 1/6)
    assert!((b - (0.5 + 1.0 / 72.0)).abs() < 1e-14);
    assert_eq!(unsafe { sl_loss_exponent(3.0, &mut b) }, SlStatus::InvalidArgument);
    assert!(last_error().contains("r > 4"));
}

#[test]
fn billiard_round_trip_and_gliding() {
    let p = SlPoint { y: 0.1, t: -0.2, eta: 1.0, tau: 1.5 };
    let (mut fwd, mut back) = (p, p);
    assert_eq!(unsafe { sl_billiard(&p, SlSign::Plus as i32, 3, &mut fwd) }, SlStatus::Ok);
    assert_eq!(unsafe { sl_billiard(&fwd, SlSign::Minus as i32, 3, &mut back) }, SlStatus::Ok);
    assert!((back.y - p.y).abs() < 1e-12 && (back.t - p.t).abs() < 1e-12);
    assert_eq!((fwd.eta, fwd.tau), (p.eta, p.tau));
    let glide = SlPoint { tau: 1.0, ..p };
    assert_eq!(unsafe { sl_billiard(&glide, 1, 1, &mut fwd) }, SlStatus::InvalidArgument);
    assert!(last_error().contains("gliding"));
    assert_eq!(unsafe { sl_billiard(&p, 0, 1, &mut fwd) }, SlStatus::InvalidArgument);
}

#[test]
fn handles_build_a_field() {
    let mut params = ptr::null_mut();
    assert_eq!(unsafe { sl_params_new(2f64.powi(-12), 0.1, 0.3, &mut params) }, SlStatus::Ok);
    let (mut lambda, mut n) = (0.0, 0u32);
    assert_eq!(unsafe { sl_params_scales(params, &mut lambda, ptr::null_mut(), &mut n) }, SlStatus::Ok);
    assert!(lambda > 10.0 && n >= 1);
    let mut model = ptr::null_mut();
    assert_eq!(unsafe { sl_cusp_new(params, &mut model) }, SlStatus::Ok);
    let (mut nx, mut ny) = (0usize, 0usize);
    let status = unsafe { sl_cusp_field(model, 0, 0.0, ptr::null_mut(), ptr::null_mut(), 0, &mut nx, &mut ny) };
    assert_eq!(status, SlStatus::BufferTooSmall);
    let (mut re, mut im) = (vec![0.0; nx * ny], vec![0.0; nx * ny]);
    let status = unsafe { sl_cusp_field(model, 0, 0.0, re.as_mut_ptr(), im.as_mut_ptr(), nx * ny, &mut nx, &mut ny) };
    assert_eq!(status, SlStatus::Ok);
    let mut norm = 0.0;
    assert_eq!(unsafe { sl_cusp_norm(model, 0, 0.0, f64::INFINITY, &mut norm) }, SlStatus::Ok);
    let peak = re.iter().zip(&im).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
    assert!((peak - norm).abs() < 1e-12 * norm);
    unsafe {
        sl_cusp_free(model);
        sl_params_free(params);
        sl_params_free(ptr::null_mut());
    }
}

#[test]
fn bad_params_leave_a_null_handle() {
    let mut params = ptr::NonNull::<SlParams>::dangling().as_ptr();
    assert_eq!(unsafe { sl_params_new(2.0, 0.1, 0.3, &mut params) }, SlStatus::InvalidArgument);
    assert!(params.is_null());
    assert!(last_error().contains("h must lie"));
}

#[test]
fn error_message_truncates() {
    let mut b = 0.0;
    unsafe { sl_loss_exponent(1.0, &mut b) };
    let mut buf = [0 as std::ffi::c_char; 8];
    let mut len = 0;
    assert_eq!(unsafe { sl_last_error(buf.as_mut_ptr(), 8, &mut len) }, SlStatus::BufferTooSmall);
    assert!(len > 7);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes().len(), 7);
}

#[test]
fn header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/strichlab.h")).unwrap();
    for sym in ["sl_params_new", "sl_cusp_field", "SL_STATUS_BUFFER_TOO_SMALL", "typedef struct SlParams SlParams"] {
        assert!(header.contains(sym), "{sym}");
    }
    let src = std::env::temp_dir().join(format!("strichlab-header-{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"strichlab.h\"\nint main(void) { SlParams *p = 0; double l; \
         return sl_params_new(0.001, 0.1, 0.3, &p) == SL_STATUS_OK && sl_params_scales(p, &l, 0, 0) == SL_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .output()
        .expect("a C compiler is on PATH");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
