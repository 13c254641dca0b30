use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mimo_fas_ffi::*;

fn last_error() -> String {
    let mut needed = 0;
    unsafe {
        assert_eq!(
            mfas_last_error_message(ptr::null_mut(), 0, &mut needed),
            MfasStatus::Ok
        );
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(
            mfas_last_error_message(buf.as_mut_ptr(), buf.len(), &mut needed),
            MfasStatus::Ok
        );
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn scenario() -> MfasScenario {
    let g = MfasGeometry {
        n1: 3,
        n2: 4,
        w1: 1.0,
        w2: 1.0,
    };
    MfasScenario {
        geom_tx: g,
        geom_rx: g,
        n_tx: 2,
        n_rx: 2,
        path_loss: 1.0,
        snr_db: 30.0,
        strategy: MfasStrategy::Qr,
    }
}

#[test]
fn link_lifecycle_and_estimates() {
    unsafe {
        let mut link = ptr::null_mut();
        assert_eq!(mfas_link_new(&scenario(), &mut link), MfasStatus::Ok);
        let mut a = MfasEstimate::default();
        let mut b = MfasEstimate::default();
        assert_eq!(mfas_link_mean_rate(link, 40, 3, &mut a), MfasStatus::Ok);
        assert_eq!(mfas_link_mean_rate(link, 40, 3, &mut b), MfasStatus::Ok);
        assert_eq!(a.value, b.value);
        assert!(a.value > 0.0 && a.ci95 > 0.0 && a.trials == 40);
        let mut o = MfasEstimate::default();
        assert_eq!(mfas_link_outage(link, 1e6, 10, 3, &mut o), MfasStatus::Ok);
        assert_eq!(o.value, 1.0);
        assert_eq!(
            mfas_link_outage(link, -1.0, 10, 3, &mut o),
            MfasStatus::Domain
        );
        mfas_link_free(link);
        mfas_link_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_codes_and_messages() {
    unsafe {
        let mut s = scenario();
        s.n_rx = 13;
        let mut link = ptr::null_mut();
        assert_eq!(mfas_link_new(&s, &mut link), MfasStatus::Domain);
        assert!(link.is_null());
        assert!(last_error().contains("13"), "{}", last_error());

        assert_eq!(
            mfas_link_new(ptr::null(), &mut link),
            MfasStatus::NullPointer
        );
        assert!(last_error().contains("scenario"));

        let mut e = MfasEstimate::default();
        assert_eq!(
            mfas_link_mean_rate(ptr::null(), 1, 0, &mut e),
            MfasStatus::NullPointer
        );

        s = scenario();
        s.strategy = MfasStrategy::Exhaustive;
        s.geom_rx = MfasGeometry {
            n1: 10,
            n2: 10,
            w1: 1.0,
            w2: 1.0,
        };
        s.geom_tx = s.geom_rx;
        s.n_tx = 4;
        s.n_rx = 4;
        assert_eq!(mfas_link_new(&s, &mut link), MfasStatus::Ok);
        assert_eq!(
            mfas_link_mean_rate(link, 1, 0, &mut e),
            MfasStatus::TooManyCombinations
        );
        mfas_link_free(link);

        let mut mu = 0.0;
        let mut p = [0.0; 2];
        assert_eq!(
            mfas_waterfill([0.0, 0.0].as_ptr(), 2, 1.0, p.as_mut_ptr(), &mut mu),
            MfasStatus::Domain
        );

        // a successful call clears the message
        assert_eq!(
            mfas_waterfill([1.0, 4.0].as_ptr(), 2, 2.0, p.as_mut_ptr(), &mut mu),
            MfasStatus::Ok
        );
        assert_eq!(last_error(), "");
        assert!((p[0] + p[1] - 2.0).abs() < 1e-8);
    }
}

#[test]
fn analytic_functions() {
    unsafe {
        let mut d = 0.0;
        assert_eq!(
            mfas_dmt(MfasDmtKind::FluidSurface, 23, 23, 4, 0.0, 0.0, 0.0, &mut d),
            MfasStatus::Ok
        );
        assert_eq!(d, 529.0);
        assert_eq!(
            mfas_dmt(
                MfasDmtKind::AntennaSelection,
                0,
                0,
                4,
                1.0,
                1.0,
                0.0,
                &mut d
            ),
            MfasStatus::Ok
        );
        assert_eq!(d, 81.0);
        assert_eq!(
            mfas_dmt(MfasDmtKind::Traditional, 4, 4, 4, 0.0, 0.0, 4.0, &mut d),
            MfasStatus::Ok
        );
        assert_eq!(d, 0.0);
        assert_eq!(
            mfas_dmt(MfasDmtKind::Traditional, 4, 4, 4, 0.0, 0.0, 5.0, &mut d),
            MfasStatus::Domain
        );

        let g = MfasGeometry {
            n1: 10,
            n2: 10,
            w1: 0.5,
            w2: 0.5,
        };
        let (mut rank, mut err) = (0, 0.0);
        assert_eq!(
            mfas_estimate_rank(&g, 1e-3, &mut rank, &mut err),
            MfasStatus::Ok
        );
        assert_eq!(rank, 13);
        assert!(err <= 0.006);
        let bad = MfasGeometry { n1: 0, ..g };
        assert_eq!(
            mfas_estimate_rank(&bad, 1e-3, &mut rank, ptr::null_mut()),
            MfasStatus::Domain
        );

        let v = CStr::from_ptr(mfas_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

const CONFIG: &str = r#"{
  "schema_version": 1,
  "experiment": "rate-vs-ns",
  "scenario": {
    "geom_tx": { "n1": 3, "n2": 4, "w1": 1.0, "w2": 1.0 },
    "geom_rx": { "n1": 3, "n2": 4, "w1": 1.0, "w2": 1.0 },
    "n_tx": 2, "n_rx": 2
  },
  "trials": 30,
  "seed": 4,
  "sweep": [1, 2]
}"#;

#[test]
fn campaigns_run_through_handles() {
    unsafe {
        let json = CString::new(CONFIG).unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(
            mfas_campaign_from_json(json.as_ptr(), &mut c),
            MfasStatus::Ok
        );
        let mut count = 9;
        let mut needed = 0;
        assert_eq!(
            mfas_campaign_validate(c, &mut count, ptr::null_mut(), 0, &mut needed),
            MfasStatus::Ok
        );
        assert_eq!((count, needed), (0, 1));

        let mut csv = Vec::new();
        for threads in [1, 2] {
            let mut r = ptr::null_mut();
            assert_eq!(mfas_campaign_run(c, threads, &mut r), MfasStatus::Ok);
            assert_eq!(mfas_results_len(r), 2);
            let mut row = MfasRow::default();
            let mut name = [0 as c_char; 64];
            assert_eq!(
                mfas_results_row(r, 1, &mut row, name.as_mut_ptr(), name.len(), &mut needed),
                MfasStatus::Ok
            );
            assert_eq!(
                CStr::from_ptr(name.as_ptr()).to_str().unwrap(),
                "fas.mean_rate"
            );
            assert_eq!((row.sweep, row.trials, row.seed), (2.0, 30, 4));
            assert_eq!(
                mfas_results_row(r, 2, &mut row, ptr::null_mut(), 0, ptr::null_mut()),
                MfasStatus::OutOfRange
            );
            assert_eq!(
                mfas_results_csv(r, ptr::null_mut(), 0, &mut needed),
                MfasStatus::Ok
            );
            let mut small = [0 as c_char; 4];
            assert_eq!(
                mfas_results_csv(r, small.as_mut_ptr(), small.len(), &mut needed),
                MfasStatus::BufferTooSmall
            );
            let mut buf = vec![0 as c_char; needed];
            assert_eq!(
                mfas_results_csv(r, buf.as_mut_ptr(), buf.len(), &mut needed),
                MfasStatus::Ok
            );
            csv.push(CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned());
            mfas_results_free(r);
        }
        assert_eq!(csv[0], csv[1]);
        assert!(csv[0].starts_with("sweep,metric,value,trials,ci95,seed\n"));
        mfas_campaign_free(c);
    }
}

#[test]
fn invalid_campaigns_report_diagnostics() {
    unsafe {
        let json = CString::new(CONFIG.replace("[1, 2]", "[1, 20]")).unwrap();
        let mut c = ptr::null_mut();
        assert_eq!(
            mfas_campaign_from_json(json.as_ptr(), &mut c),
            MfasStatus::Ok
        );
        let (mut count, mut needed) = (0, 0);
        mfas_campaign_validate(c, &mut count, ptr::null_mut(), 0, &mut needed);
        assert!(count > 0);
        let mut buf = vec![0 as c_char; needed];
        assert_eq!(
            mfas_campaign_validate(c, &mut count, buf.as_mut_ptr(), buf.len(), &mut needed),
            MfasStatus::Ok
        );
        let text = CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned();
        assert!(text.contains("scenario.n_tx"), "{text}");
        let mut r = ptr::null_mut();
        assert_eq!(mfas_campaign_run(c, 1, &mut r), MfasStatus::Config);
        assert!(r.is_null());
        mfas_campaign_free(c);

        let junk = CString::new("{").unwrap();
        assert_eq!(
            mfas_campaign_from_json(junk.as_ptr(), &mut c),
            MfasStatus::Config
        );
        let bad_utf8 = [0xffu8, 0];
        assert_eq!(
            mfas_campaign_from_json(bad_utf8.as_ptr().cast(), &mut c),
            MfasStatus::InvalidUtf8
        );
    }
}

/// Compiles the C smoke program against the generated header and the
/// static library. Skipped when no C compiler or static library is found.
#[test]
fn c_program_links_against_the_static_library() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libmimo_fas_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
