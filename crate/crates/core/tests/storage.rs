use proptest::prelude::*;
use unijoin::storage::{parse_csv, parse_schema, select, to_csv, CmpOp, Predicate, Relation, Value};

fn rows() -> impl Strategy<Value = Vec<Vec<i64>>> {
    proptest::collection::vec(proptest::collection::vec(-5i64..5, 2), 0..80)
}

fn op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge)
    ]
}

fn holds(op: CmpOp, a: i64, b: i64) -> bool {
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        CmpOp::Lt => a < b,
        CmpOp::Le => a <= b,
        CmpOp::Gt => a > b,
        CmpOp::Ge => a >= b,
    }
}

proptest! {
    #[test]
    fn select_matches_a_filter(rows in rows(), op in op(), c in -6i64..6) {
        let rel = Relation::from_int_rows("R", &["a", "b"], &rows);
        let got = select(&rel, "b", &Predicate::new(op, c)).unwrap();
        let want: Vec<Vec<Value>> =
            rows.iter().filter(|r| holds(op, r[1], c)).map(|r| r.iter().map(|&v| Value::Int(v)).collect()).collect();
        prop_assert_eq!(got.rows().collect::<Vec<_>>(), want);
    }

    #[test]
    fn sorted_copy_is_a_sorted_permutation(rows in rows()) {
        let rel = Relation::from_int_rows("R", &["a", "b"], &rows);
        let keys = vec!["b".to_string(), "a".to_string()];
        let s = rel.sorted_copy(&keys).unwrap();
        prop_assert!(s.is_sorted_on(&keys[..1]) && s.is_sorted_on(&keys));
        let got: Vec<(i64, i64)> = s.rows().map(|r| (r[1].as_int().unwrap(), r[0].as_int().unwrap())).collect();
        let mut want: Vec<(i64, i64)> = rows.iter().map(|r| (r[1], r[0])).collect();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn csv_round_trips(rows in rows()) {
        let rel = Relation::from_int_rows("R", &["a", "b"], &rows);
        let schema = parse_schema("a:int,b:int").unwrap();
        let back = parse_csv(&to_csv(&rel), "R", &schema, None).unwrap();
        prop_assert_eq!(back.rows().collect::<Vec<_>>(), rel.rows().collect::<Vec<_>>());
    }
}

#[test]
fn select_rejects_unknown_attributes_and_kinds() {
    let rel = Relation::from_int_rows("R", &["a"], &[vec![1]]);
    assert!(select(&rel, "z", &Predicate::eq(1)).is_err());
    assert!(select(&rel, "a", &Predicate::eq("x")).is_err());
}
