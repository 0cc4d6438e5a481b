use std::path::Path;
use std::process::{Command, Output};

use colorplate::raster::{read_image, write_image, Raster, Rgb};
use colorplate::scene::GroundTruth;

fn colorplate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colorplate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_reference_plate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.png");
    let o = colorplate(&["encode", "--plate", "KL29H5643", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "[62,166,155,233,38,8]");
    let img = read_image(&out).unwrap();
    assert_eq!((img.width(), img.height()), (224, 32));

    let o = colorplate(&[
        "encode",
        "--plate",
        "KL29H5643",
        "--out",
        path_str(&dir.path().join("p3.ppm")),
        "--scale",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let img = read_image(dir.path().join("p3.ppm")).unwrap();
    assert_eq!((img.width(), img.height()), (672, 96));
}

#[test]
fn encode_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.png");
    let o = colorplate(&["encode", "--plate", "", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty"), "{}", stderr(&o));

    // 46 = "A1" (10 + 1*36), a single shadowed digit.
    let o = colorplate(&[
        "encode",
        "--plate",
        "A1",
        "--out",
        path_str(&out),
        "--strict",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("digit 46"), "{}", stderr(&o));
    assert!(!out.exists());

    let o = colorplate(&["encode", "--plate", "ZZZZZZZZZZ", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));

    let o = colorplate(&[
        "encode",
        "--plate",
        "A",
        "--out",
        path_str(&dir.path().join("p.jpg")),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = colorplate(&[
        "encode",
        "--plate",
        "A",
        "--out",
        path_str(&out),
        "--segment-width",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn encode_then_decode_bare_plate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.ppm");
    colorplate(&["encode", "--plate", "kl-29 h5643", "--out", path_str(&out)]);
    let o = colorplate(&["decode", "--in", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "KL29H5643 x=0 y=0 w=224 h=32 scale=1 confidence=1.0000\n"
    );
}

#[test]
fn decode_blank_image_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blank = dir.path().join("blank.png");
    write_image(&Raster::filled(300, 100, Rgb::WHITE), &blank).unwrap();
    let o = colorplate(&["decode", "--in", path_str(&blank)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    let o = colorplate(&["decode", "--in", path_str(&blank), "--json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).trim(), "[]");
}

#[test]
fn decode_io_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = colorplate(&["decode", "--in", path_str(&dir.path().join("missing.png"))]);
    assert_eq!(o.status.code(), Some(1));
    let junk = dir.path().join("junk.png");
    std::fs::write(&junk, b"not an image").unwrap();
    let o = colorplate(&["decode", "--in", path_str(&junk)]);
    assert_eq!(o.status.code(), Some(1));
    let o = colorplate(&["decode", "--in", path_str(&junk), "--threshold", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

fn write_spec(dir: &Path, name: &str, json: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

#[test]
fn scene_then_decode_two_plates() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "two.json",
        r##"{"width": 400, "height": 200, "background": {"solid": "#ffffff"},
            "placements": [
              {"plate": "PBX2384", "x": 20, "y": 30, "scale": 1},
              {"plate": "KA01MC949", "x": 150, "y": 130, "scale": 1}]}"##,
    );
    let (img, truth) = (dir.path().join("two.png"), dir.path().join("truth.json"));
    let o = colorplate(&[
        "scene",
        "--spec",
        path_str(&spec),
        "--out",
        path_str(&img),
        "--truth",
        path_str(&truth),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let truth: GroundTruth =
        serde_json::from_str(&std::fs::read_to_string(&truth).unwrap()).unwrap();
    assert_eq!(truth.placements.len(), 2);
    assert_eq!(truth.placements[1].start_box.x, 150);

    let o = colorplate(&["decode", "--in", path_str(&img)]);
    assert_eq!(o.status.code(), Some(0));
    let plates: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split(' ').next().unwrap().to_string())
        .collect();
    assert_eq!(plates, ["PBX2384", "KA01MC949"]);

    let o = colorplate(&["decode", "--in", path_str(&img), "--json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = json.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    for (d, t) in arr.iter().zip(&truth.placements) {
        assert_eq!(d["plate"], t.plate.as_str());
        assert_eq!(d["start_box"]["x"], t.start_box.x);
        assert_eq!(d["stop_box"]["y"], t.stop_box.y);
    }
    assert!(stdout(&o).contains("\"confidence\": 1.0000"));

    let again = colorplate(&["decode", "--in", path_str(&img), "--json"]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn scene_black_background_and_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "black.json",
        r##"{"width": 256, "height": 120, "background": {"solid": "#000000"},
            "placements": [{"plate": "SK01G0693", "x": 16, "y": 44, "scale": 1}]}"##,
    );
    let (img, truth) = (dir.path().join("black.ppm"), dir.path().join("truth.json"));
    let o = colorplate(&[
        "scene",
        "--spec",
        path_str(&spec),
        "--out",
        path_str(&img),
        "--truth",
        path_str(&truth),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(truth.exists());
    let o = colorplate(&["decode", "--in", path_str(&img), "--scales", "1,2"]);
    assert!(stdout(&o).starts_with("SK01G0693 x=16 y=44 "));

    let oob = write_spec(
        dir.path(),
        "oob.json",
        r##"{"width": 256, "height": 120, "background": {"solid": "#000000"},
            "placements": [{"plate": "SK01G0693", "x": 40, "y": 44, "scale": 1}]}"##,
    );
    let o = colorplate(&[
        "scene",
        "--spec",
        path_str(&oob),
        "--out",
        path_str(&img),
        "--truth",
        path_str(&truth),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("outside"));

    let bad = write_spec(dir.path(), "bad.json", r#"{"width": 10}"#);
    let o = colorplate(&[
        "scene",
        "--spec",
        path_str(&bad),
        "--out",
        path_str(&img),
        "--truth",
        path_str(&truth),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scene_on_user_background() {
    let dir = tempfile::tempdir().unwrap();
    let bg = dir.path().join("bg.png");
    let mut pixels = Vec::new();
    for y in 0..120usize {
        for x in 0..300usize {
            pixels.push(Rgb::new(x as u8, y as u8, (x + y) as u8));
        }
    }
    write_image(&Raster::from_pixels(300, 120, pixels).unwrap(), &bg).unwrap();
    let spec = write_spec(
        dir.path(),
        "s.json",
        r##"{"width": 300, "height": 120, "background": {"solid": "#ffffff"},
            "placements": [{"plate": "KL04Q9399", "x": 40, "y": 50, "scale": 1}]}"##,
    );
    let (img, truth) = (dir.path().join("s.png"), dir.path().join("t.json"));
    let o = colorplate(&[
        "scene",
        "--spec",
        path_str(&spec),
        "--out",
        path_str(&img),
        "--truth",
        path_str(&truth),
        "--background",
        path_str(&bg),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_image(&img).unwrap().get(0, 0), Rgb::new(0, 0, 0));
    let o = colorplate(&["decode", "--in", path_str(&img)]);
    assert!(
        stdout(&o).starts_with("KL04Q9399 x=40 y=50 "),
        "{}",
        stdout(&o)
    );
}

#[test]
fn audit_palette_reports_duplicates() {
    let o = colorplate(&["audit-palette", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pairs = report["duplicate_pairs"].as_array().unwrap();
    assert!(pairs.len() >= 7);
    assert!(pairs
        .iter()
        .any(|p| p["color"] == "#ff0000" && p["indices"] == serde_json::json!([9, 196])));
    assert_eq!(
        report["shadowed"],
        serde_json::json!([21, 46, 51, 196, 201, 226, 231, 244])
    );
    assert!(stdout(&o).contains("\"min_distinct_distance\": 1.7321"));
    assert_eq!(report["min_distinct_pairs"], serde_json::json!([[59, 241]]));

    let text = colorplate(&["audit-palette"]);
    assert_eq!(text.status.code(), Some(0));
    assert!(stdout(&text).contains("#ff0000 at 9 and 196"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(colorplate(&[]).status.code(), Some(1));
    assert_eq!(colorplate(&["encode"]).status.code(), Some(1));
    assert_eq!(colorplate(&["--help"]).status.code(), Some(0));
}
