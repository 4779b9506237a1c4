//! Synthetic data: the adversarial triangle family, random relations for
//! differential testing, and a JOB-shaped star of fact and dimension tables.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::value::{Column, Kind};
use super::{Relation, StorageError};

/// Triangle instance `R(a,b), S(b,c), T(c,a)` with `n` tuples per relation on
/// which `R ⋈ S` is quadratic while the triangle output is linear.
///
/// Half of each relation is a star at hub vertex 0 (`R(i,0)`, `S(0,j)`, `T(0,t)`),
/// so `R ⋈ S` on `b = 0` alone yields `(n/2)^2` tuples. The other half is a
/// matching of `n/2` vertex-disjoint triangles `R(u,v), S(v,w), T(w,u)`, each
/// of which closes exactly once. Spoke ids are disjoint per relation so the
/// stars never close a triangle: the output has exactly `n/2` tuples.
pub fn gen_adversarial_triangle(n: usize) -> Result<[Relation; 3], StorageError> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(StorageError::Generator(format!("adversarial triangle needs an even n >= 2, got {n}")));
    }
    let half = (n / 2) as i64;
    let mut r = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n);
    for i in 1..=half {
        r.push(vec![i, 0]);
        s.push(vec![0, half + i]);
        t.push(vec![0, 2 * half + i]);
    }
    for k in 0..half {
        let u = 3 * half + 1 + 3 * k;
        let (v, w) = (u + 1, u + 2);
        r.push(vec![u, v]);
        s.push(vec![v, w]);
        t.push(vec![w, u]);
    }
    Ok([
        Relation::from_int_rows("R", &["a", "b"], &r),
        Relation::from_int_rows("S", &["b", "c"], &s),
        Relation::from_int_rows("T", &["c", "a"], &t),
    ])
}

/// A portable seeded generator: the same seed yields the same data on every platform.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A relation with `rows` random rows; integer columns draw from `0..domain`,
/// string columns from `"s0".."s{domain-1}"`.
pub fn random_relation<R: Rng + ?Sized>(
    rng: &mut R,
    name: &str,
    schema: &[(&str, Kind)],
    rows: usize,
    domain: i64,
) -> Relation {
    let domain = domain.max(1);
    let columns = schema
        .iter()
        .map(|(_, kind)| match kind {
            Kind::Int => Column::Int((0..rows).map(|_| rng.gen_range(0..domain)).collect()),
            Kind::Str => Column::Str(
                (0..rows).map(|_| Arc::from(format!("s{}", rng.gen_range(0..domain)).as_str())).collect(),
            ),
        })
        .collect();
    let attrs = schema.iter().map(|(a, _)| a.to_string()).collect();
    Relation::new(name, attrs, columns, None).expect("generated columns have equal length")
}

/// Randomly either leaves `rel` unsorted or sorts it by a random permutation of
/// its attributes (recording the metadata), so sorted-structure paths get exercised.
pub fn maybe_sorted<R: Rng + ?Sized>(rng: &mut R, rel: Relation) -> Relation {
    if rng.gen_bool(0.5) {
        return rel;
    }
    let mut keys = rel.attrs().to_vec();
    keys.shuffle(rng);
    rel.sorted_copy(&keys).expect("keys are the relation's own attributes")
}

/// A JOB-shaped instance: two fact tables of `fact_rows` rows referencing a
/// title dimension, plus a keyword dimension. Returns the relations and a
/// min-aggregate query over them.
pub fn gen_job_like<R: Rng + ?Sized>(rng: &mut R, fact_rows: usize) -> (Vec<Relation>, String) {
    let titles = (fact_rows / 5).max(1) as i64;
    let keywords = (fact_rows / 20).max(1) as i64;
    let skewed = |rng: &mut R, domain: i64| -> i64 {
        // squaring a uniform draw skews towards small ids, as real foreign keys are
        let u: f64 = rng.gen();
        ((u * u) * domain as f64) as i64 % domain
    };
    let mk: Vec<Vec<i64>> =
        (0..fact_rows).map(|_| vec![rng.gen_range(0..titles), skewed(rng, keywords)]).collect();
    let mi: Vec<Vec<i64>> =
        (0..fact_rows).map(|_| vec![skewed(rng, titles), rng.gen_range(0..100)]).collect();
    let title: Vec<Vec<i64>> = (0..titles).map(|id| vec![id, 1900 + rng.gen_range(0..120)]).collect();
    let keyword: Vec<Vec<i64>> = (0..keywords).map(|id| vec![id, rng.gen_range(1..40)]).collect();
    let rels = vec![
        Relation::from_int_rows("movie_keyword", &["movie_id", "keyword_id"], &mk),
        Relation::from_int_rows("title", &["id", "production_year"], &title),
        Relation::from_int_rows("keyword", &["id", "phrase_len"], &keyword),
        Relation::from_int_rows("movie_info", &["movie_id", "info_type"], &mi),
    ];
    let query = "Q(MIN(y,p)) :- movie_keyword(m,k), title(m,y), keyword(k,p), movie_info(m,it)".to_string();
    (rels, query)
}
