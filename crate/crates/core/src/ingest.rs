//! Canonical transaction files: parsing, serialisation, grouping,
//! eligibility filtering and salary detection.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::{month_key, AccountHistory};
use crate::rules::Tags;
use crate::taxonomy::Category;

pub const CSV_HEADER: [&str; 6] =
    ["account_id", "date", "amount_pence", "description", "category", "balance_pence"];

/// Minimum inflow, in pence, for a salary candidate.
pub const SALARY_MIN_PENCE: i64 = 10_000;
/// Inflows that are an exact multiple of this many pence are not salary.
pub const SALARY_ROUND_PENCE: i64 = 1_000;

/// One bank movement. Amounts are signed pence, negative for outflows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub account_id: String,
    pub date: NaiveDate,
    pub amount: i64,
    pub description: String,
    pub category: Category,
    pub balance_after: i64,
}

impl Transaction {
    pub fn is_inflow(&self) -> bool {
        self.amount > 0
    }

    pub fn is_outflow(&self) -> bool {
        self.amount < 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Guess from a file extension, defaulting to CSV.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

/// A row that could not be turned into a [`Transaction`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub transactions: Vec<Transaction>,
    pub rejections: Vec<Rejection>,
}

#[derive(Deserialize)]
struct JsonRow {
    account_id: String,
    date: String,
    amount_pence: i64,
    description: String,
    category: String,
    balance_pence: i64,
}

fn parse_fields(
    account_id: &str,
    date: &str,
    amount: &str,
    description: &str,
    category: &str,
    balance: &str,
) -> std::result::Result<Transaction, String> {
    let date = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d")
        .map_err(|_| "invalid date".to_string())?;
    let amount: i64 = amount.trim().parse().map_err(|_| "invalid amount".to_string())?;
    if amount == 0 {
        return Err("zero amount".into());
    }
    let balance_after: i64 = balance.trim().parse().map_err(|_| "invalid balance".to_string())?;
    let category = category.parse::<Category>()?;
    if account_id.trim().is_empty() {
        return Err("empty account_id".into());
    }
    Ok(Transaction {
        account_id: account_id.trim().to_string(),
        date,
        amount,
        description: description.to_string(),
        category,
        balance_after,
    })
}

/// Parse a canonical CSV or JSONL stream. Malformed rows become rejection
/// records carrying their 1-based line number; an input with no data rows
/// is an error.
pub fn parse_transactions<R: Read>(reader: R, format: Format) -> Result<ParseOutcome> {
    match format {
        Format::Csv => parse_csv(reader),
        Format::Jsonl => parse_jsonl(reader),
    }
}

fn parse_csv<R: Read>(reader: R) -> Result<ParseOutcome> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.is_empty() || header.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::EmptyInput);
    }
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != CSV_HEADER {
        return Err(Error::Header(format!("expected {}, found {}", CSV_HEADER.join(","), names.join(","))));
    }
    let mut out = ParseOutcome::default();
    let mut rows = 0usize;
    let mut record = csv::StringRecord::new();
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                rows += 1;
                out.rejections.push(Rejection { line, reason: format!("unreadable row: {e}") });
                continue;
            }
        }
        rows += 1;
        let line = record.position().map(|p| p.line()).unwrap_or(line);
        if record.len() != CSV_HEADER.len() {
            out.rejections.push(Rejection {
                line,
                reason: format!("expected {} fields, found {}", CSV_HEADER.len(), record.len()),
            });
            continue;
        }
        match parse_fields(&record[0], &record[1], &record[2], &record[3], &record[4], &record[5]) {
            Ok(tx) => out.transactions.push(tx),
            Err(reason) => out.rejections.push(Rejection { line, reason }),
        }
    }
    if rows == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

fn parse_jsonl<R: Read>(reader: R) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    let mut rows = 0usize;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let row: JsonRow = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                out.rejections.push(Rejection { line: line_no, reason: format!("malformed record: {e}") });
                continue;
            }
        };
        match parse_fields(
            &row.account_id,
            &row.date,
            &row.amount_pence.to_string(),
            &row.description,
            &row.category,
            &row.balance_pence.to_string(),
        ) {
            Ok(tx) => out.transactions.push(tx),
            Err(reason) => out.rejections.push(Rejection { line: line_no, reason }),
        }
    }
    if rows == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

/// Write transactions in the canonical CSV schema.
pub fn write_transactions_csv<'a, W, I>(writer: W, transactions: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Transaction>,
{
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CSV_HEADER)?;
    let mut date_buf = String::with_capacity(10);
    for tx in transactions {
        date_buf.clear();
        use std::fmt::Write as _;
        let _ = write!(date_buf, "{}", tx.date.format("%Y-%m-%d"));
        wtr.write_record([
            tx.account_id.as_str(),
            date_buf.as_str(),
            &tx.amount.to_string(),
            tx.description.as_str(),
            tx.category.code(),
            &tx.balance_after.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_transactions_jsonl<'a, W, I>(mut writer: W, transactions: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Transaction>,
{
    for tx in transactions {
        let row = serde_json::json!({
            "account_id": tx.account_id,
            "date": tx.date.format("%Y-%m-%d").to_string(),
            "amount_pence": tx.amount,
            "description": tx.description,
            "category": tx.category.code(),
            "balance_pence": tx.balance_after,
        });
        serde_json::to_writer(&mut writer, &row)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_rejections_csv<W: Write>(writer: W, rejections: &[Rejection]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["line", "reason"])?;
    for r in rejections {
        wtr.write_record([r.line.to_string().as_str(), r.reason.as_str()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Group transactions per account (account ids in sorted order). Within an
/// account, transactions are ordered by date with file order breaking ties.
pub fn group_by_account(transactions: Vec<Transaction>) -> Vec<Vec<Transaction>> {
    let mut groups: BTreeMap<String, Vec<Transaction>> = BTreeMap::new();
    for tx in transactions {
        groups.entry(tx.account_id.clone()).or_default().push(tx);
    }
    groups
        .into_values()
        .map(|mut txs| {
            txs.sort_by_key(|t| t.date);
            txs
        })
        .collect()
}

pub const MIN_MONTHS: u32 = 6;
pub const MIN_MONTHLY_TRANSACTIONS: usize = 10;

/// Outcome of the eligibility check for one account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EligibilityRecord {
    pub account_id: String,
    pub months: u32,
    pub min_monthly_transactions: usize,
    pub eligible: bool,
    pub reason: String,
}

/// Check one history. The observation window is the inclusive run of
/// calendar months from the first to the last transaction; every month in
/// it must hold at least ten transactions, and there must be at least six.
pub fn check_eligibility(history: &AccountHistory) -> EligibilityRecord {
    let (months, min_count) = match (history.transactions.first(), history.transactions.last()) {
        (Some(first), Some(last)) => {
            let start = month_key(first.date);
            let span = (month_key(last.date) - start + 1) as usize;
            let mut counts = vec![0usize; span];
            for tx in &history.transactions {
                counts[(month_key(tx.date) - start) as usize] += 1;
            }
            (span as u32, counts.into_iter().min().unwrap_or(0))
        }
        _ => (0, 0),
    };
    let reason = if months < MIN_MONTHS {
        format!("observation window of {months} months is shorter than {MIN_MONTHS}")
    } else if min_count < MIN_MONTHLY_TRANSACTIONS {
        format!("a month holds {min_count} transactions, fewer than {MIN_MONTHLY_TRANSACTIONS}")
    } else {
        String::new()
    };
    EligibilityRecord {
        account_id: history.account_id.clone(),
        months,
        min_monthly_transactions: min_count,
        eligible: reason.is_empty(),
        reason,
    }
}

/// Retain the eligible histories; the report covers every input account.
pub fn filter_eligible(histories: Vec<AccountHistory>) -> (Vec<AccountHistory>, Vec<EligibilityRecord>) {
    let mut kept = Vec::with_capacity(histories.len());
    let mut report = Vec::with_capacity(histories.len());
    for h in histories {
        let rec = check_eligibility(&h);
        if rec.eligible {
            kept.push(h);
        }
        report.push(rec);
    }
    (kept, report)
}

pub fn write_eligibility_csv<W: Write>(writer: W, report: &[EligibilityRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["account_id", "months", "min_monthly_transactions", "eligible", "reason"])?;
    for r in report {
        wtr.write_record([
            r.account_id.as_str(),
            &r.months.to_string(),
            &r.min_monthly_transactions.to_string(),
            if r.eligible { "1" } else { "0" },
            r.reason.as_str(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Salary rule for a single transaction: a credit of at least £100 in a
/// salary-source category, not a round multiple of £10, whose reference
/// matches no mobile-transfer, gambling or benefit term.
pub fn is_salary_candidate(tx: &Transaction, tags: Tags) -> bool {
    tx.amount >= SALARY_MIN_PENCE
        && tx.category.is_salary_source()
        && !tags.intersects(Tags::NON_SALARY | Tags::GAMBLING | Tags::ANY_BENEFIT)
        && tx.amount % SALARY_ROUND_PENCE != 0
}

/// Per-transaction salary flags for a tagged history.
pub fn detect_salary_inflows(history: &AccountHistory) -> Vec<bool> {
    history
        .transactions
        .iter()
        .zip(&history.tags)
        .map(|(tx, tags)| is_salary_candidate(tx, *tags))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::KeywordRuleSet;

    const HEADER: &str = "account_id,date,amount_pence,description,category,balance_pence\n";

    fn parse(text: &str) -> ParseOutcome {
        parse_transactions(text.as_bytes(), Format::Csv).unwrap()
    }

    #[test]
    fn well_formed_row_maps_fields() {
        let out = parse(&format!("{HEADER}A1,2021-03-02,-1550,TESCO STORES,groceries_housekeeping,48210\n"));
        assert!(out.rejections.is_empty());
        let tx = &out.transactions[0];
        assert_eq!(tx.account_id, "A1");
        assert_eq!(tx.amount, -1550);
        assert_eq!(tx.category, Category::GroceriesHousekeeping);
        assert_eq!(tx.balance_after, 48210);
        assert_eq!(tx.date, NaiveDate::from_ymd_opt(2021, 3, 2).unwrap());
    }

    #[test]
    fn impossible_date_is_rejected_with_line() {
        let out = parse(&format!(
            "{HEADER}A1,2021-03-02,-1550,TESCO,groceries_housekeeping,1\nA1,2021-02-30,-1550,TESCO,groceries_housekeeping,1\n"
        ));
        assert_eq!(out.transactions.len(), 1);
        assert_eq!(out.rejections, vec![Rejection { line: 3, reason: "invalid date".into() }]);
    }

    #[test]
    fn bad_amount_and_category_are_rejected() {
        let out = parse(&format!(
            "{HEADER}A1,2021-03-02,12.50,X,groceries_housekeeping,1\nA1,2021-03-02,-5,X,food,1\nA1,2021-03-02,0,X,cash,1\n"
        ));
        assert!(out.transactions.is_empty());
        let reasons: Vec<_> = out.rejections.iter().map(|r| r.reason.as_str()).collect();
        assert_eq!(reasons, ["invalid amount", "unknown category 'food'", "zero amount"]);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse_transactions(&b""[..], Format::Csv), Err(Error::EmptyInput)));
        assert!(matches!(parse_transactions(HEADER.as_bytes(), Format::Csv), Err(Error::EmptyInput)));
        assert!(matches!(parse_transactions(&b"\n\n"[..], Format::Jsonl), Err(Error::EmptyInput)));
    }

    #[test]
    fn wrong_header_is_an_error() {
        let r = parse_transactions(&b"id,date,amount\nA,2021-01-01,5\n"[..], Format::Csv);
        assert!(matches!(r, Err(Error::Header(_))));
    }

    #[test]
    fn jsonl_mirror_parses() {
        let text = r#"{"account_id":"A1","date":"2021-03-02","amount_pence":-1550,"description":"TESCO, STORES","category":"groceries_housekeeping","balance_pence":48210}
{"account_id":"A1","date":"2021-13-02","amount_pence":-1,"description":"x","category":"cash","balance_pence":0}
"#;
        let out = parse_transactions(text.as_bytes(), Format::Jsonl).unwrap();
        assert_eq!(out.transactions.len(), 1);
        assert_eq!(out.transactions[0].description, "TESCO, STORES");
        assert_eq!(out.rejections[0].line, 2);
        let mut buf = Vec::new();
        write_transactions_jsonl(&mut buf, &out.transactions).unwrap();
        let again = parse_transactions(&buf[..], Format::Jsonl).unwrap();
        assert_eq!(again.transactions, out.transactions);
    }

    #[test]
    fn salary_filters() {
        let rules = KeywordRuleSet::builtin();
        let tx = |amount: i64, cat: Category, desc: &str| Transaction {
            account_id: "A".into(),
            date: NaiveDate::from_ymd_opt(2021, 1, 25).unwrap(),
            amount,
            description: desc.into(),
            category: cat,
            balance_after: 0,
        };
        let check = |t: Transaction| is_salary_candidate(&t, rules.classify(&t.description));
        assert!(check(tx(124_317, Category::Earnings, "ACME LTD PAYROLL")));
        assert!(!check(tx(5_000, Category::Earnings, "ACME LTD PAYROLL")));
        assert!(!check(tx(25_000, Category::Earnings, "ACME LTD PAYROLL")));
        assert!(!check(tx(124_317, Category::Earnings, "MOBILE TRANSFER J DOE")));
        assert!(!check(tx(124_317, Category::Earnings, "BET365 WITHDRAWAL")));
        assert!(!check(tx(124_317, Category::PensionIncome, "ACME PENSION")));
        assert!(check(tx(124_317, Category::CreditBankTransfers, "ACME LTD")));
        assert!(!check(tx(-124_317, Category::Earnings, "ACME LTD")));
        assert!(check(tx(10_001, Category::Earnings, "ACME")));
        assert!(!check(tx(9_999, Category::Earnings, "ACME")));
    }
}
