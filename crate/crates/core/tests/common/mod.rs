#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lopos::cli::{build_coverage, build_site, CoverageFile, LoadedSite, SiteSpec};
use lopos::coverage::Coverage;
use lopos::moncat::ThinCat;
use lopos::presheaf::{Presheaf, PresheafSpec};
use lopos::quantale::RawQuantale;

pub const SITES: [&str; 6] = ["luk3", "tnat3", "zmod12", "powerset2", "chain3", "chain2_x_luk3"];
pub const LOCALIC: [&str; 2] = ["powerset2", "chain3"];

pub fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn json_names(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "json").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

pub struct CorpusSite {
    pub name: String,
    pub loaded: LoadedSite,
    pub coverages: Vec<(String, Coverage<ThinCat>)>,
    pub presheaves: Vec<(String, Presheaf)>,
}

impl CorpusSite {
    pub fn site(&self) -> &Arc<ThinCat> {
        &self.loaded.site
    }

    pub fn coverage(&self, name: &str) -> &Coverage<ThinCat> {
        &self.coverages.iter().find(|(n, _)| n == name).unwrap().1
    }

    pub fn presheaf(&self, name: &str) -> &Presheaf {
        &self.presheaves.iter().find(|(n, _)| n == name).unwrap().1
    }
}

pub fn load_site(name: &str) -> CorpusSite {
    let root = corpus();
    let spec: SiteSpec = read(&root.join("sites").join(format!("{name}.json")));
    let loaded = build_site(&spec).unwrap();
    let cov_dir = root.join("coverages").join(name);
    let coverages = json_names(&cov_dir)
        .into_iter()
        .map(|c| {
            let file: CoverageFile = read(&cov_dir.join(format!("{c}.json")));
            let cov = build_coverage(&loaded, &file).unwrap();
            (c, cov)
        })
        .collect();
    let ps_dir = root.join("presheaves").join(name);
    let presheaves = json_names(&ps_dir)
        .into_iter()
        .map(|p| {
            let spec: PresheafSpec = read(&ps_dir.join(format!("{p}.json")));
            let f = Presheaf::from_spec(Arc::clone(&loaded.site), &spec).unwrap();
            (p, f)
        })
        .collect();
    CorpusSite {
        name: name.to_string(),
        loaded,
        coverages,
        presheaves,
    }
}

pub fn load_all() -> Vec<CorpusSite> {
    SITES.iter().map(|s| load_site(s)).collect()
}

/// Brute-force least upper bound straight from the order relation.
fn lub(raw: &RawQuantale, items: &[usize]) -> Option<usize> {
    let n = raw.len();
    let uppers: Vec<usize> = (0..n).filter(|&z| items.iter().all(|&x| raw.leq(x, z))).collect();
    uppers.iter().copied().find(|&z| uppers.iter().all(|&w| raw.leq(z, w)))
}

/// Independent reading of the quantale laws for a finite table.
pub fn oracle_is_quantale(raw: &RawQuantale) -> bool {
    let n = raw.len();
    let all = |f: &dyn Fn(usize, usize) -> bool| (0..n).all(|a| (0..n).all(|b| f(a, b)));
    let antisymmetric = all(&|a, b| a == b || !(raw.leq(a, b) && raw.leq(b, a)));
    if !antisymmetric || n >= 20 {
        return false;
    }
    let subsets: Vec<Vec<usize>> = (0u32..1 << n)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect();
    let sups: Vec<Option<usize>> = subsets.iter().map(|s| lub(raw, s)).collect();
    if sups.iter().any(Option::is_none) {
        return false;
    }
    let assoc = (0..n).all(|c| all(&|a, b| raw.mul(raw.mul(a, b), c) == raw.mul(a, raw.mul(b, c))));
    let unit = raw
        .unit()
        .is_none_or(|e| (0..n).all(|a| raw.mul(e, a) == a && raw.mul(a, e) == a));
    let distributive = (0..n).all(|a| {
        subsets.iter().zip(&sups).all(|(s, j)| {
            let j = j.unwrap();
            let left: Vec<usize> = s.iter().map(|&x| raw.mul(a, x)).collect();
            let right: Vec<usize> = s.iter().map(|&x| raw.mul(x, a)).collect();
            lub(raw, &left) == Some(raw.mul(a, j)) && lub(raw, &right) == Some(raw.mul(j, a))
        })
    });
    assoc && unit && distributive
}
