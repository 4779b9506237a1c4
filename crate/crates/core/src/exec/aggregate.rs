/// Aggregate of one independent branch: the number of assignments it
/// contributes and the minimum of each aggregated column it binds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partial {
    pub count: u64,
    /// Indexed by aggregate column; `None` where the branch binds no such column.
    pub mins: Vec<Option<i64>>,
}

impl Partial {
    pub fn new(columns: usize) -> Partial {
        Partial { count: 0, mins: vec![None; columns] }
    }

    /// The aggregate of a branch with one assignment and no columns.
    pub fn unit(columns: usize) -> Partial {
        Partial { count: 1, mins: vec![None; columns] }
    }

    pub(crate) fn min_with(&mut self, col: usize, v: i64) {
        let m = &mut self.mins[col];
        *m = Some(m.map_or(v, |c| c.min(v)));
    }
}

/// Combines the aggregates of branches that form a Cartesian product:
/// counts multiply, minima concatenate. A product with an empty branch is
/// empty, so it contributes no minima either.
pub fn factorized_combine(parts: &[Partial]) -> Partial {
    let columns = parts.first().map_or(0, |p| p.mins.len());
    let mut out = Partial::unit(columns);
    for p in parts {
        out.count *= p.count;
        for (o, m) in out.mins.iter_mut().zip(&p.mins) {
            if let Some(v) = m {
                *o = Some(o.map_or(*v, |c| c.min(*v)));
            }
        }
    }
    if out.count == 0 {
        out.mins.iter_mut().for_each(|m| *m = None);
    }
    out
}

/// `sum_i sum_j .. (a_i * b_j * ..)` computed as the product of the sums.
pub fn sum_product(branches: &[&[i64]]) -> i64 {
    branches.iter().map(|b| b.iter().sum::<i64>()).product()
}
