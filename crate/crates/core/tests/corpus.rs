mod common;

use common::{fixture, fixture_path};
use sdpforge::corpus::{dataset_stats, load_corpus, load_corpus_dir, Adapter};
use sdpforge::stats::{select_labels, GroupBy, PathStatsTable, SelectionPolicy, TableKind};
use sdpforge::DEFAULT_WHITELIST;

#[test]
fn top_five_path_labels_are_the_whitelist() {
    let table = PathStatsTable::from_tsv(&fixture("label_table.tsv"), TableKind::Labels, GroupBy::RelationType).unwrap();
    let agg = table.aggregate();
    assert_eq!((agg["nmod"], agg["nsubj"], agg["obl"], agg["obj"], agg["appos"]), (1653, 1148, 1086, 815, 623));
    let top = select_labels(&table, SelectionPolicy::TopK(5)).unwrap();
    assert_eq!(top, ["nmod", "nsubj", "obl", "obj", "appos"]);
    let mut sorted = top.clone();
    sorted.sort();
    let mut wl: Vec<&str> = DEFAULT_WHITELIST.to_vec();
    wl.sort();
    assert_eq!(sorted, wl);
    // acl is the first label left out
    let six = select_labels(&table, SelectionPolicy::TopK(6)).unwrap();
    assert_eq!(six[5], "acl");
    assert_eq!(select_labels(&table, SelectionPolicy::MinCount(600)).unwrap(), top);
}

fn crossre_line(key: &str, rels: usize) -> String {
    let relations: Vec<String> = (0..rels).map(|i| format!("[0, 0, {}, {}, \"role\", \"\", false, false]", i + 2, i + 2)).collect();
    let ner: Vec<String> = std::iter::once("[0, 0, \"person\"]".to_owned())
        .chain((0..rels).map(|i| format!("[{}, {}, \"org\"]", i + 2, i + 2)))
        .collect();
    let tokens: Vec<String> = (0..rels + 3).map(|i| format!("\"t{i}\"")).collect();
    format!(
        "{{\"doc_key\": \"{key}\", \"sentence\": [{}], \"ner\": [{}], \"relations\": [{}]}}\n",
        tokens.join(", "),
        ner.join(", "),
        relations.join(", ")
    )
}

#[test]
fn crossre_directory_counts() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, rels: &[usize]| {
        let text: String = rels.iter().enumerate().map(|(i, &r)| crossre_line(&format!("{name}{i}"), r)).collect();
        std::fs::write(dir.path().join(name), text).unwrap();
    };
    write("news-train.json", &[1, 2, 0]);
    write("news-test.json", &[3]);
    write("ai-dev.json", &[2, 2]);
    std::fs::write(dir.path().join("README.md"), "not data").unwrap();
    let adapter = Adapter::from_name("crossre").unwrap();
    let corpus = load_corpus_dir(dir.path(), &adapter).unwrap();
    let stats = dataset_stats(&corpus);
    assert_eq!(stats.total().sentences, 6);
    assert_eq!(stats.total().relations, 10);
    assert_eq!((stats.cell("news", "train").sentences, stats.cell("news", "train").relations), (3, 3));
    assert_eq!(stats.split_total("dev").relations, 4);

    // the TSV and JSON renderings carry the same numbers
    let json = stats.to_json();
    for line in stats.to_tsv().lines().skip(1) {
        let c: Vec<&str> = line.split('\t').collect();
        let (s, r): (usize, usize) = (c[2].parse().unwrap(), c[3].parse().unwrap());
        let want = match (c[0], c[1]) {
            ("total", "total") => (json["total"]["sentences"].as_u64(), json["total"]["relations"].as_u64()),
            (d, "total") => (Some(stats.domain_total(d).sentences as u64), Some(stats.domain_total(d).relations as u64)),
            (d, sp) => (json["cells"][d][sp]["sentences"].as_u64(), json["cells"][d][sp]["relations"].as_u64()),
        };
        assert_eq!(want, (Some(s as u64), Some(r as u64)), "{line}");
    }
}

#[test]
fn canonical_fixture_stats() {
    let corpus = load_corpus(&fixture_path("figures.jsonl"), &Adapter::Canonical).unwrap();
    let stats = dataset_stats(&corpus);
    assert_eq!(stats.total().sentences, 4);
    assert_eq!(stats.relation_types.values().sum::<usize>(), stats.total().relations);
}
