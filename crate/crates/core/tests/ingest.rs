use chrono::NaiveDate;
use fvkit_core::ingest::{
    parse_transactions, write_transactions_csv, write_transactions_jsonl, Format, Rejection, CSV_HEADER,
};
use fvkit_core::{Category, Transaction};
use proptest::prelude::*;

fn transaction() -> impl Strategy<Value = Transaction> {
    let categories: Vec<Category> = Category::all().collect();
    (
        "[A-Z][A-Z0-9]{0,6}",
        0i64..3000,
        prop_oneof![-5_000_000i64..-1, 1i64..5_000_000],
        "[ -~]{0,24}",
        proptest::sample::select(categories),
        -9_000_000i64..9_000_000,
    )
        .prop_map(|(account_id, day, amount, description, category, balance_after)| Transaction {
            account_id,
            date: NaiveDate::from_ymd_opt(2015, 1, 1).unwrap() + chrono::Duration::days(day),
            amount,
            description,
            category,
            balance_after,
        })
}

proptest! {
    #[test]
    fn csv_round_trip(txs in proptest::collection::vec(transaction(), 1..40)) {
        let mut buf = Vec::new();
        write_transactions_csv(&mut buf, &txs).unwrap();
        let out = parse_transactions(&buf[..], Format::Csv).unwrap();
        prop_assert!(out.rejections.is_empty(), "{:?}", out.rejections);
        prop_assert_eq!(out.transactions, txs);
    }

    #[test]
    fn jsonl_round_trip(txs in proptest::collection::vec(transaction(), 1..40)) {
        let mut buf = Vec::new();
        write_transactions_jsonl(&mut buf, &txs).unwrap();
        let out = parse_transactions(&buf[..], Format::Jsonl).unwrap();
        prop_assert!(out.rejections.is_empty(), "{:?}", out.rejections);
        prop_assert_eq!(out.transactions, txs);
    }
}

#[test]
fn rejections_carry_their_line_numbers() {
    let good = "A1,2021-03-02,-1550,TESCO,groceries_housekeeping,100";
    let bad = [
        ("A1,2021-02-29,-1,X,cash,0", "invalid date"),
        ("A1,2021-03-02,abc,X,cash,0", "invalid amount"),
        ("A1,2021-03-02,-1,X,cash,", "invalid balance"),
        (",2021-03-02,-1,X,cash,0", "empty account_id"),
    ];
    let mut text = CSV_HEADER.join(",") + "\n";
    let mut expected = Vec::new();
    let mut line = 1u64;
    for (i, (row, reason)) in bad.iter().enumerate() {
        for _ in 0..i + 1 {
            text += good;
            text += "\n";
            line += 1;
        }
        text += row;
        text += "\n";
        line += 1;
        expected.push(Rejection { line, reason: reason.to_string() });
    }
    let out = parse_transactions(text.as_bytes(), Format::Csv).unwrap();
    assert_eq!(out.transactions.len(), 10);
    assert_eq!(out.rejections, expected);
}
