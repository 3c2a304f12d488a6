//! Seeded synthetic project exercising every stage end to end.
//!
//! Two count indicators are produced on different boundary editions: one
//! on 2011 SA2 regions in a wide year-per-column layout, corresponded forward
//! to 2016, and one on 2021 SA2 regions in a long layout, corresponded
//! backward to 2016. The raw files carry small counts, missing tokens,
//! padded region codes and duplicate rows for the cleaning loop to repair.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::pipeline::PipelineError;

pub const AGES: [&str; 4] = ["0-4", "5-9", "10-14", "15-19"];
pub const SEXES: [&str; 2] = ["F", "M"];
pub const FIRST_YEAR: i32 = 2011;
pub const LAST_YEAR: i32 = 2020;
pub const CONFIG_FILE: &str = "config.json";

const REGIONS_2011: u32 = 60;

fn code11(i: u32) -> String {
    (101_021_000 + i).to_string()
}

fn code16(i: u32) -> String {
    (111_021_000 + i).to_string()
}

fn code16_split(i: u32) -> String {
    (111_021_500 + i).to_string()
}

fn code21(c16: &str, part: u32) -> String {
    let n: u32 = c16.parse().expect("numeric code");
    (n + 10_000_000 + part * 700).to_string()
}

/// 2011 to 2016 edges: mostly one-to-one, some splits, some merges.
fn table_2011_2016() -> Vec<(String, String, &'static str)> {
    let mut edges = Vec::new();
    for i in 0..REGIONS_2011 {
        if i % 10 == 0 {
            edges.push((code11(i), code16(i), "0.6"));
            edges.push((code11(i), code16_split(i), "0.4"));
        } else if i % 15 == 7 {
            edges.push((code11(i), code16(i - 1), "1"));
        } else {
            edges.push((code11(i), code16(i), "1"));
        }
    }
    edges
}

/// 2016 to 2021 edges: one-to-one, even splits, a small leak into a
/// neighbour (discarded on the way back) and a large one (suppressed).
fn table_2016_2021(sources: &[String]) -> Vec<(String, String, &'static str)> {
    let mut edges = Vec::new();
    for (j, c) in sources.iter().enumerate() {
        let next = sources.get(j + 1);
        match (j % 12, next) {
            (2, _) => {
                edges.push((c.clone(), code21(c, 0), "0.5"));
                edges.push((c.clone(), code21(c, 1), "0.5"));
            }
            (5, Some(n)) => {
                edges.push((c.clone(), code21(c, 0), "0.95"));
                edges.push((c.clone(), code21(n, 0), "0.05"));
            }
            (9, Some(n)) => {
                edges.push((c.clone(), code21(c, 0), "0.7"));
                edges.push((c.clone(), code21(n, 0), "0.3"));
            }
            _ => edges.push((c.clone(), code21(c, 0), "1")),
        }
    }
    edges
}

fn table_csv(edges: &[(String, String, &str)]) -> String {
    let mut s = String::from("FROM_CODE,TO_CODE,RATIO\n");
    for (a, b, r) in edges {
        let _ = writeln!(s, "{a},{b},{r}");
    }
    s
}

fn count(rng: &mut ChaCha8Rng, missing: &str) -> String {
    if rng.random_bool(0.004) {
        return missing.to_string();
    }
    let v: u32 = if rng.random_bool(0.12) { rng.random_range(0..5) } else { rng.random_range(5..180) };
    v.to_string()
}

fn births_raw(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::from("SA2CODE_11,AGE,SEX");
    for y in FIRST_YEAR..=LAST_YEAR {
        let _ = write!(s, ",{y}");
    }
    s.push('\n');
    for i in 0..REGIONS_2011 {
        for age in AGES {
            for sex in SEXES {
                let code = if rng.random_bool(0.02) { format!(" {}", code11(i)) } else { code11(i) };
                let _ = write!(s, "{code},{age},{sex}");
                for _ in FIRST_YEAR..=LAST_YEAR {
                    let _ = write!(s, ",{}", count(rng, "n.p."));
                }
                s.push('\n');
            }
        }
    }
    s
}

fn admissions_raw(rng: &mut ChaCha8Rng, regions: &[String]) -> String {
    let mut rows = Vec::new();
    for code in regions {
        for year in FIRST_YEAR..=LAST_YEAR {
            for age in AGES {
                for sex in SEXES {
                    rows.push(format!("{code},{year},{age},{sex},{}", count(rng, "..")));
                }
            }
        }
    }
    // Exported twice by the source system.
    for k in [17usize, 903, 4410] {
        if let Some(r) = rows.get(k).cloned() {
            rows.insert(k + 1, r);
        }
    }
    let mut s = String::from("SA2CODE_21,YEAR,AGE_GROUP,SEX,VALUE\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn write(dir: &Path, rel: &str, text: &str) -> Result<(), PipelineError> {
    let path = dir.join(rel);
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p).map_err(|e| PipelineError::io(p, e))?;
    }
    std::fs::write(&path, text).map_err(|e| PipelineError::io(&path, e))
}

fn config() -> serde_json::Value {
    let years: Vec<String> = (FIRST_YEAR..=LAST_YEAR).map(|y| y.to_string()).collect();
    json!({
        "project": {
            "name": "demo-wellbeing",
            "temporal_coverage": {"start": FIRST_YEAR, "end": LAST_YEAR},
            "target_edition": 2016,
            "target_level": "SA2",
            "vocabulary": {"age_groups": AGES, "sexes": SEXES},
            "metadata": {
                "metadata_reference": "demo/metadata",
                "access_rights": "Synthetic data; open access",
                "licence": "CC-BY-4.0",
                "fields_of_research": "4206 Public health",
                "socio_economic_objectives": "2004 Public health",
                "legal_ethical_requirements": "Synthetic counts; no ethics approval required",
                "standard_vocabulary_note": "ASGS SA2 codes; five-year age groups; sex F/M"
            },
            "metadata_mode": "publishable",
            "dmp_answers": {
                "discovery": "Synthetic demonstration sources generated locally.",
                "storage": "Project directory; outputs are reproducible from the config."
            },
            "run_timestamp": "2024-01-01T00:00:00Z"
        },
        "sources": [
            {
                "descriptor": {
                    "source_id": "births_registry",
                    "name": "Synthetic birth registrations",
                    "custodian": "Demo registry",
                    "access_mode": "request",
                    "collection_start": "2011-01-01",
                    "collection_end": "2020-12-31",
                    "url_or_locator": "raw/births_2011.csv"
                },
                "mapping": {
                    "geography": "SA2CODE_11",
                    "age_group": {"column": "AGE"},
                    "sex": {"column": "SEX"},
                    "year_columns": years,
                    "value_kind": "count",
                    "missing_tokens": ["n.p."],
                    "layout": "wide_by_year"
                },
                "table": "raw/births_2011.csv"
            },
            {
                "descriptor": {
                    "source_id": "hospital_admissions",
                    "name": "Synthetic hospital admissions",
                    "custodian": "Demo health department",
                    "access_mode": "custom_download",
                    "collection_start": "2011-01-01",
                    "collection_end": "2020-12-31",
                    "url_or_locator": "raw/admissions_2021.csv"
                },
                "mapping": {
                    "geography": "SA2CODE_21",
                    "calendar_year": {"column": "YEAR"},
                    "age_group": {"column": "AGE_GROUP"},
                    "sex": {"column": "SEX"},
                    "value": "VALUE",
                    "value_kind": "count",
                    "missing_tokens": [".."]
                },
                "table": "raw/admissions_2021.csv"
            }
        ],
        "indicators": [
            {
                "id": "births",
                "name": "Births to young mothers",
                "nest_domain": "healthy",
                "source_id": "births_registry",
                "definition": "Registered births by mother's age group and child's sex.",
                "links": {"cleaning_code_link": "config.json#stages", "data_file_links": ["raw/births_2011.csv"]}
            },
            {
                "id": "admissions",
                "name": "Hospital admissions",
                "nest_domain": "healthy",
                "source_id": "hospital_admissions",
                "definition": "Hospital admissions by age group and sex.",
                "links": {"data_file_links": ["raw/admissions_2021.csv"], "project_doc_links": ["notes/admissions-extract.md"]}
            }
        ],
        "correspondence_tables": [
            {"from": 2011, "to": 2016, "level": "SA2", "path": "tables/sa2_2011_2016.csv"},
            {"from": 2016, "to": 2021, "level": "SA2", "path": "tables/sa2_2016_2021.csv"}
        ],
        "stages": [
            {"stage": "ingest"},
            {"stage": "clean", "revisions": [
                {"whitespace_normalization": true},
                {"whitespace_normalization": true, "dedupe_policy": "keep_first"}
            ]},
            {"stage": "correspond", "discard_threshold": 0.1},
            {"stage": "privacy", "suppression": {"threshold": 5}, "noise": 0},
            {"stage": "qa"},
            {"stage": "docs"}
        ],
        "output_dir": "out"
    })
}

/// Writes the demo project into `dir` and returns the config path.
pub fn write_demo(dir: &Path, seed: u64) -> Result<PathBuf, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t1 = table_2011_2016();
    let mut sources16: Vec<String> = t1.iter().map(|(_, b, _)| b.clone()).collect();
    sources16.sort();
    sources16.dedup();
    let t2 = table_2016_2021(&sources16);
    let mut regions21: Vec<String> = t2.iter().map(|(_, b, _)| b.clone()).collect();
    regions21.sort();
    regions21.dedup();

    write(dir, "tables/sa2_2011_2016.csv", &table_csv(&t1))?;
    write(dir, "tables/sa2_2016_2021.csv", &table_csv(&t2))?;
    write(dir, "raw/births_2011.csv", &births_raw(&mut rng))?;
    write(dir, "raw/admissions_2021.csv", &admissions_raw(&mut rng, &regions21))?;
    let text = serde_json::to_string_pretty(&config()).expect("config serializes") + "\n";
    write(dir, CONFIG_FILE, &text)?;
    Ok(dir.join(CONFIG_FILE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{run, PipelineConfig, RunOptions};

    #[test]
    fn demo_is_seeded() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_demo(a.path(), 7).unwrap();
        write_demo(b.path(), 7).unwrap();
        for f in ["raw/births_2011.csv", "raw/admissions_2021.csv", "tables/sa2_2016_2021.csv", CONFIG_FILE] {
            assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
        }
    }

    #[test]
    fn demo_runs_clean() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig::load(&write_demo(dir.path(), 1).unwrap()).unwrap();
        let s = run(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(s.exit_code(), 0, "{s:?}");
        let out = dir.path().join("out");
        for f in ["indicators/births/births.csv", "indicators/admissions/admissions.csv", "dictionary.md", "dmp.md"] {
            assert!(out.join(f).exists(), "{f}");
        }
    }
}
