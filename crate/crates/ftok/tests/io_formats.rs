use ftok::core::model::{Direction, Mode};
use ftok::core::{Lexicon, NGramModel};
use ftok::{corpus, model_io, reference, Error};
use proptest::prelude::*;

fn model_from(lines: &[String], mode: Mode, max_n: usize) -> NGramModel {
    let mut m = NGramModel::new(mode, max_n).unwrap();
    m.train(lines);
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_round_trip(lines in prop::collection::vec("[ab\\\\\t\r\n c早é]{0,12}", 0..6), grams in any::<bool>(), max_n in 1usize..4) {
        let mode = if grams { Mode::Grams } else { Mode::Chars };
        let m = model_from(&lines, mode, max_n);
        let dir = tempfile::tempdir().unwrap();
        for name in ["m.ftok", "m.ftok.gz"] {
            let path = dir.path().join(name);
            model_io::save(&m, &path).unwrap();
            prop_assert_eq!(&model_io::load(&path).unwrap(), &m);
        }
        let text = model_io::to_bytes(&m);
        let records = text.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count();
        prop_assert_eq!(records as u64, 1 + m.count_params());
    }

    #[test]
    fn lines_rejoin_to_file(lines in prop::collection::vec("[a-z 早\t]{0,10}", 1..8)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();
        prop_assert_eq!(&corpus::read_all_lines(&path).unwrap(), &lines);
        std::fs::write(&path, lines.join("\r\n") + "\r\n").unwrap();
        prop_assert_eq!(&corpus::read_all_lines(&path).unwrap(), &lines);
    }

    #[test]
    fn lexicon_reload_is_identity(entries in prop::collection::btree_map("[a-z早 \t]{1,6}", 1u64..1000, 0..20)) {
        let lexicon = Lexicon::from_entries(entries.iter().map(|(k, &v)| (k.as_str(), v))).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.txt");
        corpus::write_lexicon(&lexicon, &path).unwrap();
        let once = corpus::read_lexicon(&path).unwrap();
        prop_assert_eq!(&once, &lexicon);
        corpus::write_lexicon(&once, &path).unwrap();
        prop_assert_eq!(corpus::read_lexicon(&path).unwrap(), once);
    }

    #[test]
    fn json_line_count(objects in prop::collection::vec((any::<bool>(), any::<bool>(), any::<bool>()), 0..20)) {
        let fields = ["title", "desc", "content"];
        let mut lines = Vec::new();
        let mut present = 0;
        for (t, d, c) in &objects {
            let mut obj = serde_json::Map::new();
            for (flag, key) in [(t, "title"), (d, "desc"), (c, "content")] {
                if *flag {
                    obj.insert(key.into(), serde_json::Value::String(format!("{key} text")));
                    present += 1;
                }
            }
            lines.push(serde_json::Value::Object(obj).to_string());
        }
        let (out, malformed) = corpus::extract_json_fields(&lines, &fields);
        prop_assert_eq!(out.len(), present);
        prop_assert_eq!(malformed, 0);
    }
}

#[test]
fn model_file_layout() {
    let m = model_from(&["ab ab ac".to_string()], Mode::Chars, 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.ftok");
    model_io::save(&m, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "FTOK\t1\tchars\t1");
    assert_eq!(lines.len(), 13);
    let kinds: String = lines[1..].iter().map(|l| &l[..1]).collect();
    assert_eq!(kinds, "GGGGFFFFBBBB");
    let mut sorted = lines[1..].to_vec();
    sorted.sort_by_key(|l| ("GFB".find(&l[..1]).unwrap(), l.to_string()));
    assert_eq!(sorted, lines[1..].to_vec());
}

#[test]
fn load_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.ftok");
    std::fs::write(&path, "FTOK\t9\tchars\t1\n").unwrap();
    let err = model_io::load(&path).unwrap_err();
    assert!(matches!(&err, Error::Version { expected, found, .. } if expected == "1" && found == "9"));
    std::fs::write(&path, "FTOK\t1\tchars\t1\nG\t1\ta\t3").unwrap();
    assert!(matches!(model_io::load(&path).unwrap_err(), Error::Truncated { .. }));
    std::fs::write(&path, "").unwrap();
    assert!(matches!(model_io::load(&path).unwrap_err(), Error::Truncated { .. }));
    let err = model_io::load(dir.path().join("absent.ftok")).unwrap_err();
    assert!(err.to_string().contains("absent.ftok"));
}

#[test]
fn reference_record_split() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ref.txt");
    std::fs::write(&path, "ab\u{1F} \u{1F}cd\n").unwrap();
    let r = reference::reference_from_file(&path, &["ab cd"]).unwrap();
    let texts: Vec<&str> = r.get(0).unwrap().iter().map(|t| t.text.as_str()).collect();
    assert_eq!(texts, vec!["ab", " ", "cd"]);
    std::fs::write(&path, "ab\nab\n").unwrap();
    let err = reference::reference_from_file(&path, &["ab", "abc"]).unwrap_err();
    assert!(err.to_string().contains("coverage mismatch at line 2"));
}

#[test]
fn transitions_survive_escaping() {
    let m = model_from(&["a\tb\\".to_string()], Mode::Chars, 1);
    let text = String::from_utf8(model_io::to_bytes(&m)).unwrap();
    assert!(text.contains("F\t1\ta\t\\t\t1\n"));
    assert!(text.contains("B\t1\t\\\\\tb\t1\n"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("esc.ftok");
    std::fs::write(&path, &text).unwrap();
    let back = model_io::load(&path).unwrap();
    assert_eq!(back.transitions("\t", Direction::Forward).unwrap().get("b"), Some(&1));
}
