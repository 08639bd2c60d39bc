#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Three papers, one citation between the first two.
pub fn tiny_content_cites(dir: &Path) -> (PathBuf, PathBuf) {
    let content = write(
        dir,
        "tiny.content",
        "p1\t1\t0\t1\tA\np2\t0\t1\t0\tB\np3\t1\t1\t0\tA\n",
    );
    let cites = write(dir, "tiny.cites", "p1\tp2\n");
    (content, cites)
}

/// Path a - b - c - d - e as JSON lines; labels alternate.
pub fn path_jsonl(dir: &Path, feature_scale: f64) -> PathBuf {
    let ids = ["a", "b", "c", "d", "e"];
    let mut text = String::new();
    for (i, id) in ids.iter().enumerate() {
        let mut nb = Vec::new();
        if i > 0 {
            nb.push(format!("\"{}\"", ids[i - 1]));
        }
        if i + 1 < ids.len() {
            nb.push(format!("\"{}\"", ids[i + 1]));
        }
        let label = if i < 2 { "pos" } else { "neg" };
        let f = [(i + 1) as f64 * feature_scale, feature_scale];
        text.push_str(&format!(
            "{{\"id\":\"{id}\",\"features\":[{},{}],\"label\":\"{label}\",\"neighbors\":[{}]}}\n",
            f[0],
            f[1],
            nb.join(",")
        ));
    }
    write(dir, "path.jsonl", &text)
}

pub fn path_manifest(dir: &Path, normalize: bool) -> PathBuf {
    write(
        dir,
        "path.manifest.json",
        &format!(
            r#"{{"name": "path", "source": {{"format": "jsonl", "path": "path.jsonl"}},
               "positive_classes": ["pos"], "normalize_features": {normalize}, "train_count": 3}}"#
        ),
    )
}
