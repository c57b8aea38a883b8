use std::path::Path;
use std::process::{Command, Output};

fn chladni(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chladni"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = chladni(out, args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn error_line(o: &Output) -> String {
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(err.lines().count(), 1, "expected one line, got {err:?}");
    assert!(err.starts_with("error kind="), "{err}");
    err
}

#[test]
fn unit_cube_census() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["mesh", "--slab", "1x1x1", "--name", "cube"]);
    assert!(text.contains("V=8 E=18 F=16 T=5"), "{text}");
    assert!(dir.path().join("cube_K.json").exists());
    assert!(dir.path().join("cube_Kprime.json").exists());
}

#[test]
fn default_slab_census() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["mesh"]);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].contains("V=693 E=3212 F=4520 T=2000 boundary(F=1040"), "{text}");
    assert!(lines[1].contains("V=10425 E=61544 F=99120 T=48000 boundary(F=6240"), "{text}");
    assert!(lines.iter().all(|l| l.contains("chi=1")));
}

#[test]
fn mesh_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let first = ok(dir.path(), &["mesh", "--slab", "2x1x3", "--name", "a"]);
    let k = dir.path().join("a_K.json");
    let second = ok(dir.path(), &["mesh", "--mesh", k.to_str().unwrap(), "--name", "b"]);
    assert_eq!(first, second);
}

#[test]
fn heightfield_plate() {
    let dir = tempfile::tempdir().unwrap();
    let hf = dir.path().join("plate.json");
    std::fs::write(&hf, r#"{"nx":3,"nz":2,"cell_cm":1.0,"thickness_cm":[0.5,0.5,0.5,0.4,0.4,0.4]}"#).unwrap();
    let text = ok(dir.path(), &["mesh", "--heightfield", hf.to_str().unwrap(), "--name", "hf"]);
    assert!(text.contains("T=30"), "{text}");
}

#[test]
fn bad_input_is_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let e = error_line(&chladni(dir.path(), &["mesh", "--slab", "0x1x1"]));
    assert!(e.contains("kind=invalid-input"), "{e}");
    let e = error_line(&chladni(dir.path(), &["eigs", "--freq=-3", "--slab", "1x1x1"]));
    assert!(e.contains("frequencies"), "{e}");
    let e = error_line(&chladni(dir.path(), &["resonate", "--slab", "1x1x1", "--modes", "0"]));
    assert!(e.contains("--modes"), "{e}");
    let e = error_line(&chladni(dir.path(), &["assemble", "--slab", "1x1x1", "--material", "balsa"]));
    assert!(e.contains("kind=invalid-input") && e.contains("balsa"), "{e}");
    let e = error_line(&chladni(dir.path(), &["mesh", "--mesh", "/nonexistent/k.json"]));
    assert!(e.contains("kind="), "{e}");
    let e = error_line(&chladni(dir.path(), &["frobnicate"]));
    assert!(e.contains("kind=usage"), "{e}");
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = chladni(dir.path(), &["--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("resonate"));
}

#[test]
fn assemble_reports_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["assemble", "--slab", "2x1x2", "--name", "p"]);
    // every boundary face of an axis-aligned slab is a rank-zero subsystem
    let nb = 2 * (2 * 2 + 2 + 2) * 2;
    assert!(text.contains(&format!("boundary subsystems      {nb}")), "{text}");
    assert!(text.contains(&format!("null rows r_n            {}", 2 * nb)), "{text}");
    for f in ["mass", "stiffness", "constraints", "fine_mass", "fine_stiffness"] {
        let p = dir.path().join(format!("p_{f}.mtx"));
        let head = std::fs::read_to_string(&p).unwrap();
        assert!(head.starts_with("%%MatrixMarket"), "{f}");
    }
}

#[test]
fn eigs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["eigs", "--slab", "2x1x2", "--freq", "80", "--modes", "2", "--dump-shifted"];
    assert_eq!(ok(a.path(), &args), ok(b.path(), &args));
    for f in ["slab_coarse_80Hz_eigvec.csv", "slab_fine_80Hz_eigvec.csv", "slab_eigs.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    assert!(a.path().join("slab_fine_80Hz_shifted.mtx").exists());
    assert!(a.path().join("slab_coarse_80Hz_lanczos.log").exists());
}

fn nodal_flags(path: &Path) -> Vec<bool> {
    std::fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').nth(3).unwrap() == "1").collect()
}

#[test]
fn resonate_nested_and_scale_free() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let base = ["resonate", "--slab", "3x1x3", "--freq", "80", "--basis", "fine", "--comega", "0.8,0.2,0.05"];
    ok(a.path(), &base);
    let mut doubled = base.to_vec();
    doubled.extend(["--amplitude", "2"]);
    ok(b.path(), &doubled);
    let mut prev: Option<Vec<bool>> = None;
    for c in ["0.8", "0.2", "0.05"] {
        let name = format!("slab_fine_80Hz_c{c}_nodal.csv");
        let bytes = std::fs::read(a.path().join(&name)).unwrap();
        assert_eq!(bytes, std::fs::read(b.path().join(&name)).unwrap(), "{name}");
        let flags = nodal_flags(&a.path().join(&name));
        if let Some(p) = &prev {
            assert!(flags.iter().zip(p).all(|(s, l)| !s || *l), "nodal sets not nested at c={c}");
        }
        prev = Some(flags);
        let svg = std::fs::read_to_string(a.path().join(format!("slab_fine_80Hz_c{c}_chladni.svg"))).unwrap();
        assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    }
    assert!(a.path().join("slab_resonance_flux.txt").exists());
}

#[test]
fn resonate_multi_mode_names() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["resonate", "--slab", "2x1x2", "--freq", "147", "--basis", "coarse", "--modes", "3"]);
    assert!(dir.path().join("slab_coarse_147Hz_modes3_c0.8_nodal.csv").exists());
}

#[test]
fn flux_tables() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(dir.path(), &["flux", "--slab", "2x1x2", "--freq", "80,222"]);
    assert!(text.contains("f_coarse") && text.contains("f_fine"));
    let csv = std::fs::read_to_string(dir.path().join("slab_flux.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let eig: f64 = cols[4].parse().unwrap();
        assert!(eig.abs() <= 0.5, "{line}");
    }
}
