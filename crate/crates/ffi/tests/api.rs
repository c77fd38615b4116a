use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use qlz_ffi::*;

fn mississippi() -> Vec<u32> {
    b"mississippi".iter().map(|&b| (b - b'a' + 1) as u32).collect()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qlz_last_error()).to_string_lossy().into_owned() }
}

#[test]
fn compress_round_trips() {
    let mut t = mississippi();
    t.push(0);
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(qlz_compress(t.as_ptr(), t.len(), 0, &mut h), QlzStatus::Ok);
        assert_eq!(qlz_compression_r(h), 9);
        assert!(qlz_compression_z(h) > 0 && qlz_compression_factors(h) >= qlz_compression_z(h));
        assert!(qlz_compression_queries(h) > 0);
        let mut len = 0;
        assert_eq!(qlz_compression_decompress(h, ptr::null_mut(), 0, &mut len), QlzStatus::BufferTooSmall);
        assert_eq!(len, t.len());
        let mut back = vec![0u32; len];
        assert_eq!(qlz_compression_decompress(h, back.as_mut_ptr(), len, &mut len), QlzStatus::Ok);
        assert_eq!(back, t);
        qlz_compression_free(h);
    }
}

#[test]
fn fixed_tau_without_sentinel() {
    let t: Vec<u32> = b"abacabcabcaaaab".iter().map(|&b| (b - b'a' + 1) as u32).collect();
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(qlz_compress(t.as_ptr(), t.len(), 2, &mut h), QlzStatus::Ok);
        assert_eq!(qlz_compression_z(h), 8);
        assert_eq!(qlz_compression_r(h), 0);
        assert_eq!(qlz_compression_tau(h), 2);
        qlz_compression_free(h);
    }
}

#[test]
fn index_queries_and_serialization() {
    let t = mississippi();
    let mut idx = ptr::null_mut();
    unsafe {
        assert_eq!(qlz_index_build(t.as_ptr(), t.len(), &mut idx), QlzStatus::Ok);
        assert_eq!(qlz_index_len(idx), 12);
        assert_eq!(qlz_index_runs(idx), 9);
        let sa = [12, 11, 8, 5, 2, 1, 10, 9, 7, 4, 6, 3];
        let mut v = 0;
        for (i, &want) in sa.iter().enumerate() {
            assert_eq!(qlz_index_sa(idx, i + 1, &mut v), QlzStatus::Ok);
            assert_eq!(v, want);
            assert_eq!(qlz_index_isa(idx, want, &mut v), QlzStatus::Ok);
            assert_eq!(v, i + 1);
        }
        assert_eq!(qlz_index_lce(idx, 2, 5, &mut v), QlzStatus::Ok);
        assert_eq!(v, 4);
        let issi = &t[1..5];
        let mut n = 0;
        assert_eq!(qlz_index_locate(idx, issi.as_ptr(), 4, ptr::null_mut(), 0, &mut n), QlzStatus::Ok);
        assert_eq!(n, 2);
        let mut pos = [0usize; 1];
        assert_eq!(qlz_index_locate(idx, issi.as_ptr(), 4, pos.as_mut_ptr(), 1, &mut n), QlzStatus::BufferTooSmall);

        let mut size = 0;
        assert_eq!(qlz_index_serialize(idx, ptr::null_mut(), 0, &mut size), QlzStatus::BufferTooSmall);
        let mut bytes = vec![0u8; size];
        assert_eq!(qlz_index_serialize(idx, bytes.as_mut_ptr(), size, &mut size), QlzStatus::Ok);
        let mut copy = ptr::null_mut();
        assert_eq!(qlz_index_load(bytes.as_ptr(), size, &mut copy), QlzStatus::Ok);
        assert_eq!(qlz_index_sa(copy, 5, &mut v), QlzStatus::Ok);
        assert_eq!(v, 2);
        bytes[4] = 99;
        let mut bad = ptr::null_mut();
        assert_eq!(qlz_index_load(bytes.as_ptr(), size, &mut bad), QlzStatus::Version);
        assert!(bad.is_null());
        qlz_index_free(copy);
        qlz_index_free(idx);
    }
}

#[test]
fn errors_are_reported() {
    let mut v = 0;
    let mut idx = ptr::null_mut();
    unsafe {
        assert_eq!(qlz_index_sa(ptr::null(), 1, &mut v), QlzStatus::NullPointer);
        assert_eq!(last_error(), "handle is null");
        assert_eq!(qlz_index_build(ptr::null(), 3, &mut idx), QlzStatus::NullPointer);
        let t = [1u32, 0, 2];
        assert_eq!(qlz_index_build(t.as_ptr(), 3, &mut idx), QlzStatus::InvalidArgument);
        let t = mississippi();
        assert_eq!(qlz_index_build(t.as_ptr(), t.len(), &mut idx), QlzStatus::Ok);
        assert_eq!(qlz_index_sa(idx, 0, &mut v), QlzStatus::OutOfRange);
        assert_eq!(qlz_index_lce(idx, 1, 13, &mut v), QlzStatus::OutOfRange);
        assert!(!last_error().is_empty());
        qlz_index_free(idx);
        qlz_index_free(ptr::null_mut());
        qlz_compression_free(ptr::null_mut());
        assert_eq!(qlz_compression_z(ptr::null()), 0);
    }
    let version = unsafe { CStr::from_ptr(qlz_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qlz.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for f in exports {
        assert!(header.contains(&format!("{f}(")), "{f} missing from qlz.h");
    }
}

/// Compiles tests/smoke.c against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else { return };
    // target/<profile>/deps/api-xxxx -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libqlz_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("qlz_smoke");
    let status = Command::new(cc)
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "cc failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

fn which_cc() -> Result<&'static str, ()> {
    Command::new("cc").arg("--version").output().map(|_| "cc").map_err(|_| ())
}
