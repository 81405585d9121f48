use std::process::{Command, Output};

fn grig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .trim_end()
        .to_string()
}

#[test]
fn apply_d_to_100() {
    let out = grig(&["apply", "--g", "d", "--w", "100"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "101");
}

#[test]
fn bcd_is_trivial() {
    assert_eq!(stdout(&grig(&["trivial", "--g", "bcd"])), "true");
    assert_eq!(stdout(&grig(&["trivial", "--g", "ab"])), "false");
}

#[test]
fn group_queries() {
    assert_eq!(stdout(&grig(&["reduce", "--g", "abcbd"])), "ab");
    assert_eq!(stdout(&grig(&["section", "--g", "ada"])), "ada = (b, 1)");
    assert_eq!(stdout(&grig(&["section", "--g", "b", "--u", "11"])), "d");
    assert_eq!(stdout(&grig(&["order", "--g", "ab"])), "16");
    assert_eq!(
        stdout(&grig(&["act-beta", "--g", "a", "--xi", "(1)^w"])),
        "0(1)^w"
    );
    assert_eq!(
        stdout(&grig(&["stab", "--g", "b", "--xi", "(1)^w"])),
        "true"
    );
    assert_eq!(
        stdout(&grig(&["stab-o", "--g", "b", "--xi", "(1)^w"])),
        "false"
    );
    assert_eq!(stdout(&grig(&["klein-coset", "--g", "c"])), "c");
}

#[test]
fn order_cap_failure_exits_one() {
    let out = grig(&["order", "--g", "ab", "--cap", "8"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(grig(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(grig(&["apply", "--g", "d"]).status.code(), Some(2));
    assert_eq!(grig(&["trivial", "--g", "xyz"]).status.code(), Some(2));
    assert_eq!(grig(&["ball", "--graph", "torus"]).status.code(), Some(2));
}

#[test]
fn delta_reports_a_distance_line() {
    let out = grig(&[
        "delta",
        "--g1",
        "orbit:1110(1)^w",
        "--g2",
        "limit:0",
        "--max-radius",
        "4",
    ]);
    assert!(out.status.success());
    let line = stdout(&out);
    assert!(
        line.starts_with("exact") || line.starts_with("bound"),
        "{line}"
    );
    let close = stdout(&grig(&[
        "delta",
        "--g1",
        "orbit:1110(1)^w",
        "--g2",
        "limit:1",
        "--max-radius",
        "4",
    ]));
    assert!(close.starts_with("bound 4"), "{close}");
}

#[test]
fn verification_results_drive_exit_codes() {
    assert!(grig(&["verify", "--graph", "cover", "--radius", "6"])
        .status
        .success());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(
        &path,
        r#"{"vertices":["p"],"edges":[["p","p","b"]],"marked":"p"}"#,
    )
    .unwrap();
    let out = grig(&["verify", "--graph", &format!("file:{}", path.display())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).starts_with("fail(ii)"));
}

#[test]
fn automorphisms_and_quotients() {
    assert_eq!(
        stdout(&grig(&[
            "autos",
            "--graph",
            "cover",
            "--radius",
            "6",
            "--symmetric"
        ])),
        "4"
    );
    assert_eq!(
        stdout(&grig(&[
            "autos",
            "--graph",
            "limit:1",
            "--radius",
            "6",
            "--symmetric"
        ])),
        "2"
    );
    let out = grig(&[
        "quotient", "--graph", "cover", "--radius", "8", "--by", "d", "--expect", "limit:1",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let out = grig(&[
        "quotient", "--graph", "cover", "--radius", "8", "--by", "d", "--expect", "limit:0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn coset_ball_matches_orbit_ball() {
    let coset = stdout(&grig(&[
        "coset-ball",
        "--subgroup",
        "stab:(01)^w",
        "--radius",
        "3",
        "--json",
    ]));
    let orbit = stdout(&grig(&[
        "ball",
        "--graph",
        "orbit:(01)^w",
        "--radius",
        "3",
        "--json",
    ]));
    let count = |s: &str| {
        serde_json::from_str::<serde_json::Value>(s).unwrap()["vertices"]
            .as_array()
            .unwrap()
            .len()
    };
    assert_eq!(count(&coset), count(&orbit));
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("coset.json");
    let b = dir.path().join("orbit.json");
    grig(&[
        "coset-ball",
        "--subgroup",
        "stab:(01)^w",
        "--radius",
        "3",
        "--out",
        a.to_str().unwrap(),
    ]);
    grig(&[
        "ball",
        "--graph",
        "orbit:(01)^w",
        "--radius",
        "3",
        "--out",
        b.to_str().unwrap(),
    ]);
    let d = stdout(&grig(&[
        "delta",
        "--g1",
        &format!("file:{}", a.display()),
        "--g2",
        &format!("file:{}", b.display()),
        "--max-radius",
        "8",
    ]));
    assert_eq!(d, "zero");
}

#[test]
fn dot_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("limit.dot");
    let json = dir.path().join("limit.json");
    let out = grig(&[
        "export-dot",
        "--graph",
        "limit:2",
        "--radius",
        "5",
        "--out",
        dot.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&dot)
        .unwrap()
        .contains("doublecircle"));
    grig(&[
        "ball",
        "--graph",
        "limit:2",
        "--radius",
        "5",
        "--out",
        json.to_str().unwrap(),
    ]);
    let d = stdout(&grig(&[
        "delta",
        "--g1",
        &format!("file:{}", dot.display()),
        "--g2",
        &format!("file:{}", json.display()),
    ]));
    assert_eq!(d, "zero");
    let reimported = stdout(&grig(&[
        "ball",
        "--graph",
        &format!("file:{}", dot.display()),
        "--radius",
        "5",
        "--json",
    ]));
    let direct = stdout(&grig(&[
        "ball", "--graph", "limit:2", "--radius", "5", "--json",
    ]));
    assert_eq!(reimported, direct);
}

#[test]
fn outputs_are_deterministic() {
    let args = ["converge", "--z", "3..7", "--json"];
    let first = grig(&args);
    let second = grig(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let args = ["ball", "--graph", "cover", "--radius", "5", "--symmetric"];
    assert_eq!(grig(&args).stdout, grig(&args).stdout);
}

#[test]
fn experiments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# short run\nz = 3..5\nradius_budget = 64\n").unwrap();
    let out = grig(&["converge", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().count(), 4);

    let out = grig(&["converge", "--z", "7", "--radius-budget", "4"]);
    assert_eq!(out.status.code(), Some(1));

    assert!(grig(&["isolated", "--radius", "6"]).status.success());
    assert!(grig(&["isolated", "--point", "(01)^w", "--radius", "3"])
        .status
        .success());
    assert_eq!(
        grig(&["isolated", "--point", "(1)^w", "--radius", "2"])
            .status
            .code(),
        Some(1)
    );

    let out = grig(&[
        "minimality",
        "--start",
        "orbit:(01)^w",
        "--target",
        "limit:1:2",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("found"));

    let out = grig(&[
        "ergodic",
        "--xi",
        "(01)^w",
        "--cylinder",
        "1",
        "--tolerance",
        "0.1",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));

    let out = grig(&[
        "subdist",
        "--h1",
        "stab:(1)^w",
        "--h2",
        "stab-o:(1)^w",
        "--cap",
        "3",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["distance"]["kind"], "exact");
}

#[test]
fn acted_graph_addresses() {
    let moved = stdout(&grig(&[
        "ball",
        "--graph",
        "orbit:(1)^w@a",
        "--radius",
        "0",
        "--json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&moved).unwrap();
    assert_eq!(v["marked"], "0(1)^w");
    let d = stdout(&grig(&[
        "delta",
        "--g1",
        "orbit:(1)^w@a",
        "--g2",
        "orbit:0(1)^w",
        "--max-radius",
        "6",
    ]));
    assert_eq!(d, "bound 6 (distance <= 2^-7)");
}
