//! Generation of a single synthetic account.

use chrono::{Datelike, NaiveDate};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::persona::{Cadence, PersonaSet, PersonaSpec};
use super::{CohortConfig, GroundTruth};
use crate::history::{month_key, month_start, Demographics, Gender};
use crate::ingest::{Transaction, MIN_MONTHLY_TRANSACTIONS, SALARY_MIN_PENCE, SALARY_ROUND_PENCE};
use crate::rng;
use crate::taxonomy::Category;

const EMPLOYERS: [&str; 10] = [
    "ACME LOGISTICS",
    "NORTHGATE RETAIL",
    "BRIGHTWATER NHS TRUST",
    "CITY COUNCIL",
    "HARBOUR FOODS",
    "PENNINE ENGINEERING",
    "OAKLEAF CARE HOMES",
    "SUMMIT TELECOM",
    "REDBRICK UNIVERSITY",
    "GREENFIELD WAREHOUSING",
];
const TRADITIONAL_CARDS: [&str; 6] =
    ["BARCLAYCARD", "CAPITAL ONE", "MBNA", "AMERICAN EXPRESS", "HALIFAX CARD", "NATWEST CARD"];
const NONTRADITIONAL_CARDS: [&str; 5] = ["MONZO CARD", "VANQUIS", "AQUA CARD", "FLUID CARD", "TYMIT"];
const TRADITIONAL_LOANS: [&str; 4] = ["BARCLAYS LOAN", "HSBC LOAN", "SANTANDER LOAN", "TSB LOAN"];
const NONTRADITIONAL_LOANS: [&str; 5] = ["ZOPA LOAN", "LENDABLE", "KOYO LOAN", "OAKBROOK", "STARLING LOAN"];
const PAYDAY_LENDERS: [&str; 3] = ["LENDING STREAM", "MR LENDER", "MONEYBOAT"];
const BOOKMAKERS: [&str; 5] = ["BET365", "PADDY POWER", "SKY BET", "WILLIAM HILL", "LADBROKES"];
const BNPL: [&str; 3] = ["KLARNA", "CLEARPAY", "LAYBUY"];
const FRIENDS: [&str; 4] = ["J SMITH", "A PATEL", "M JONES", "S KHAN"];

fn merchants(cat: Category) -> &'static [&'static str] {
    match cat {
        Category::Housing => &["RENT PAYMENT", "HOMEFIRST LETTINGS", "NATIONWIDE MORTGAGE"],
        Category::Utilities => &["BRITISH GAS", "THAMES WATER", "OCTOPUS ENERGY", "COUNCIL TAX", "BT GROUP", "VIRGIN MEDIA"],
        Category::Insurance => &["AVIVA INSURANCE", "DIRECT LINE", "ADMIRAL INSURANCE"],
        Category::Pension => &["SCOTTISH WIDOWS PENSION", "AVIVA PENSION"],
        Category::Subscriptions => &["NETFLIX", "SPOTIFY", "AMAZON PRIME", "DISNEY PLUS"],
        Category::ChildSchool => &["PARENTPAY", "SCHOOL MEALS", "NURSERY FEES", "MOTHERCARE", "SMYTHS TOYS"],
        Category::TransportFuel => &["SHELL", "BP FUEL", "TFL TRAVEL", "TRAINLINE", "ESSO"],
        Category::Cash => &["ATM WITHDRAWAL", "CASH LINK"],
        Category::CharityDonation => &["OXFAM", "BRITISH RED CROSS", "CANCER RESEARCH"],
        Category::EatingOutTakeaways => &["MCDONALDS", "DELIVEROO", "JUST EAT", "NANDOS", "GREGGS", "COSTA COFFEE"],
        Category::FashionBeauty => &["PRIMARK", "ASOS", "BOOTS", "ZARA", "NEXT RETAIL", "SUPERDRUG"],
        Category::FunLeisure => &["ODEON CINEMA", "STEAM GAMES", "TICKETMASTER", "HOLLYWOOD BOWL"],
        Category::GroceriesHousekeeping => &["TESCO STORES", "SAINSBURYS", "ASDA", "ALDI", "LIDL", "MORRISONS"],
        Category::HealthFitness => &["PUREGYM", "DAVID LLOYD", "HOLLAND BARRETT"],
        Category::MedicalHealth => &["BUPA", "SPECSAVERS", "NHS PRESCRIPTION", "DENTAL CARE"],
        Category::OtherExpenditure => &["AMAZON MARKETPLACE", "EBAY", "ARGOS"],
        _ => &["CARD PAYMENT"],
    }
}

/// When a recurring flow pays out.
#[derive(Debug, Clone, Copy)]
enum Schedule {
    DayOfMonth(u32),
    /// Every `period` days, on days whose day number is `phase` modulo the
    /// period.
    Every { period: i64, phase: i64 },
}

impl Schedule {
    fn fires(self, date: NaiveDate) -> bool {
        match self {
            Schedule::DayOfMonth(d) => date.day() == d,
            Schedule::Every { period, phase } => (date.num_days_from_ce() as i64 - phase).rem_euclid(period) == 0,
        }
    }
}

#[derive(Debug, Clone)]
struct Recurring {
    schedule: Schedule,
    amount: f64,
    jitter: f64,
    category: Category,
    description: String,
    /// Only in this month index, when set.
    only_month: Option<usize>,
    salary: bool,
}

#[derive(Debug, Clone)]
struct RandomFlow {
    per_month: f64,
    amount: f64,
    spread: f64,
    category: Category,
    descriptions: Vec<String>,
}

struct Plan {
    recurring: Vec<Recurring>,
    random: Vec<RandomFlow>,
    target: f64,
    monthly_sd: f64,
}

fn pounds(gbp: f64) -> f64 {
    gbp * 100.0
}

/// Multiplicative noise with mean one.
fn lognormal_factor(rng: &mut ChaCha8Rng, cv: f64) -> f64 {
    if cv <= 0.0 {
        return 1.0;
    }
    let s2 = (1.0 + cv * cv).ln();
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    (z * s2.sqrt() - s2 / 2.0).exp()
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as u64
}

fn normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    if sd <= 0.0 {
        return mean;
    }
    Normal::new(mean, sd).expect("finite parameters").sample(rng)
}

/// Integer part plus a Bernoulli draw on the fractional part.
fn stochastic_round(rng: &mut ChaCha8Rng, x: f64) -> usize {
    let base = x.floor();
    base as usize + usize::from(rng.random_bool((x - base).clamp(0.0, 1.0)))
}

fn pick_distinct(rng: &mut ChaCha8Rng, pool: &[&str], n: usize) -> Vec<String> {
    pool.choose_multiple(rng, n.min(pool.len())).map(|s| s.to_string()).collect()
}

/// Probability pulled towards 1 for holders of the attribute and towards 0
/// otherwise; at strength 0 the attribute has no effect.
pub(crate) fn linked_probability(base: f64, attribute: bool, strength: f64) -> f64 {
    if attribute {
        base + strength * (1.0 - base)
    } else {
        base * (1.0 - strength)
    }
}

struct Attributes {
    female: bool,
    has_child: bool,
    disability: bool,
    carer: bool,
}

fn build_plan(
    rng: &mut ChaCha8Rng,
    persona: &PersonaSpec,
    set: &PersonaSet,
    attrs: &Attributes,
    strength: f64,
    months: usize,
) -> Plan {
    let mut recurring = Vec::new();
    let mut random = Vec::new();
    let effects = &set.effects;
    let friday_phase = NaiveDate::from_ymd_opt(2021, 1, 1).expect("valid").num_days_from_ce() as i64;

    // salary
    let s = &persona.salary;
    if rng.random_bool(s.probability) {
        let schedule = match s.cadence {
            Cadence::Monthly => Schedule::DayOfMonth(rng.random_range(1..=28)),
            Cadence::FourWeekly => Schedule::Every { period: 28, phase: rng.random_range(0..28) },
            Cadence::Weekly => Schedule::Every { period: 7, phase: friday_phase - rng.random_range(0..2) },
        };
        let amount = pounds(s.amount_gbp) * lognormal_factor(rng, s.cv);
        let employer = EMPLOYERS.choose(rng).expect("non-empty");
        recurring.push(Recurring {
            schedule,
            amount: amount.max(SALARY_MIN_PENCE as f64 * 1.5),
            jitter: s.jitter,
            category: Category::Earnings,
            description: format!("{employer} SALARY"),
            only_month: None,
            salary: true,
        });
    }
    let p = &persona.planning;
    if rng.random_bool(p.pension_income_probability) {
        recurring.push(Recurring {
            schedule: Schedule::DayOfMonth(rng.random_range(1..=28)),
            amount: pounds(p.pension_income_gbp) * lognormal_factor(rng, 0.3),
            jitter: 0.0,
            category: Category::PensionIncome,
            description: "WORKPLACE PENSION PAYMENT".into(),
            only_month: None,
            salary: false,
        });
    }

    // benefits
    let b = &persona.benefits;
    let benefit_table: [(f64, Option<bool>, Schedule, f64, Category, &str); 7] = [
        (b.child, Some(attrs.has_child), Schedule::Every { period: 28, phase: rng.random_range(0..28) }, 96.0, Category::BenefitChild, "DWP CHILD BENEFIT"),
        (b.child_tax_credit, Some(attrs.has_child), Schedule::Every { period: 28, phase: rng.random_range(0..28) }, 240.0, Category::BenefitChildTaxCredit, "HMRC CHILD TAX CREDIT"),
        (b.carer, Some(attrs.carer), Schedule::Every { period: 7, phase: friday_phase - 3 }, 76.0, Category::BenefitCarer, "DWP CARERS ALLOWANCE"),
        (b.disability, Some(attrs.disability), Schedule::Every { period: 28, phase: rng.random_range(0..28) }, 370.0, Category::BenefitDisability, "DWP PIP"),
        (b.universal_credit, None, Schedule::DayOfMonth(rng.random_range(1..=28)), 550.0, Category::BenefitUniversalCredit, "DWP UNIVERSAL CREDIT"),
        (b.working_tax_credit, None, Schedule::Every { period: 28, phase: rng.random_range(0..28) }, 160.0, Category::BenefitWorkingTaxCredit, "HMRC WORKING TAX CREDIT"),
        (b.employment_support, None, Schedule::Every { period: 14, phase: rng.random_range(0..14) }, 230.0, Category::BenefitEmploymentSupport, "DWP ESA"),
    ];
    for (base, linked, schedule, gbp, category, description) in benefit_table {
        let prob = linked.map_or(base, |a| linked_probability(base, a, strength));
        if rng.random_bool(prob.clamp(0.0, 1.0)) {
            recurring.push(Recurring {
                schedule,
                amount: pounds(gbp) * lognormal_factor(rng, 0.15),
                jitter: 0.0,
                category,
                description: description.into(),
                only_month: None,
                salary: false,
            });
        }
    }

    // everyday spending
    for (cat, rate, is_recurring) in persona.spend_rates() {
        let mut count = rate.count * lognormal_factor(rng, 0.35);
        if cat == Category::FashionBeauty && attrs.female {
            count *= effects.female_fashion_multiplier;
        }
        if cat == Category::MedicalHealth && attrs.disability {
            count *= 1.0 + effects.disability_medical_per_strength * strength;
        }
        let amount = pounds(rate.amount_gbp) * lognormal_factor(rng, 0.3);
        let pool = merchants(cat);
        if is_recurring {
            for _ in 0..stochastic_round(rng, count) {
                recurring.push(Recurring {
                    schedule: Schedule::DayOfMonth(rng.random_range(1..=28)),
                    amount: amount * lognormal_factor(rng, 0.2),
                    jitter: 0.03,
                    category: cat,
                    description: pool.choose(rng).expect("non-empty").to_string(),
                    only_month: None,
                    salary: false,
                });
            }
        } else {
            random.push(RandomFlow {
                per_month: count,
                amount,
                spread: 0.5,
                category: cat,
                descriptions: pool.iter().map(|s| s.to_string()).collect(),
            });
        }
    }

    // children
    let school_probability = linked_probability(effects.childless_school_probability, attrs.has_child, strength);
    if rng.random_bool(school_probability) {
        let boost = if attrs.has_child { 1.0 + effects.child_spend_per_strength * strength } else { 1.0 };
        let amount = pounds(effects.child_school_gbp) * boost * lognormal_factor(rng, 0.3);
        recurring.push(Recurring {
            schedule: Schedule::DayOfMonth(rng.random_range(1..=28)),
            amount,
            jitter: 0.05,
            category: Category::ChildSchool,
            description: "PARENTPAY".into(),
            only_month: None,
            salary: false,
        });
        random.push(RandomFlow {
            per_month: 1.0 * boost,
            amount: pounds(20.0),
            spread: 0.5,
            category: Category::ChildSchool,
            descriptions: merchants(Category::ChildSchool).iter().map(|s| s.to_string()).collect(),
        });
    }

    // gambling
    let g = &persona.gambling;
    let gamble_p = g.probability * if attrs.female { effects.female_gambling_multiplier } else { 1.0 };
    if rng.random_bool(gamble_p.clamp(0.0, 1.0)) {
        let rate = g.bets_per_month * lognormal_factor(rng, 0.4);
        let stake = pounds(g.stake_gbp) * lognormal_factor(rng, 0.4);
        let n_books = rng.random_range(1..=2);
        let books = pick_distinct(rng, &BOOKMAKERS, n_books);
        random.push(RandomFlow {
            per_month: rate,
            amount: -stake,
            spread: 0.5,
            category: Category::Gambling,
            descriptions: books.clone(),
        });
        random.push(RandomFlow {
            per_month: rate * g.win_probability,
            amount: stake * 2.2,
            spread: 0.5,
            category: Category::Gambling,
            descriptions: books,
        });
    } else if rng.random_bool(g.lottery_probability) {
        recurring.push(Recurring {
            schedule: Schedule::DayOfMonth(rng.random_range(1..=28)),
            amount: pounds(rng.random_range(2..=10) as f64),
            jitter: 0.0,
            category: Category::Gambling,
            description: "NATIONAL LOTTERY".into(),
            only_month: None,
            salary: false,
        });
    }

    // distress
    let d = &persona.distress;
    if rng.random_bool(d.rdd_probability) {
        random.push(RandomFlow {
            per_month: d.rdd_per_month * lognormal_factor(rng, 0.3),
            amount: pounds(5.0),
            spread: 0.0,
            category: Category::ReturnedDirectDebits,
            descriptions: vec!["UNPAID DD CHARGE".into()],
        });
    }
    if rng.random_bool(d.debt_management_probability) {
        recurring.push(Recurring {
            schedule: Schedule::DayOfMonth(rng.random_range(1..=28)),
            amount: pounds(d.debt_management_gbp) * lognormal_factor(rng, 0.3),
            jitter: 0.0,
            category: Category::DebtManagementInsolvency,
            description: "STEPCHANGE DMP".into(),
            only_month: None,
            salary: false,
        });
    }
    if rng.random_bool(d.bnpl_probability) {
        random.push(RandomFlow {
            per_month: d.bnpl_per_month * lognormal_factor(rng, 0.3),
            amount: pounds(d.bnpl_gbp),
            spread: 0.4,
            category: Category::OtherExpenditure,
            descriptions: BNPL.iter().map(|s| s.to_string()).collect(),
        });
    }

    // credit products
    let c = &persona.credit;
    let cards = [
        (&TRADITIONAL_CARDS[..], c.traditional_cards),
        (&NONTRADITIONAL_CARDS[..], c.nontraditional_cards),
    ];
    for (pool, mean) in cards {
        let n = poisson(rng, mean) as usize;
        for name in pick_distinct(rng, pool, n) {
            recurring.push(Recurring {
                schedule: Schedule::DayOfMonth(rng.random_range(1..=28)),
                amount: pounds(c.card_payment_gbp) * lognormal_factor(rng, 0.5),
                jitter: 0.25,
                category: Category::CreditCardPayments,
                description: format!("{name} PAYMENT"),
                only_month: None,
                salary: false,
            });
        }
    }
    let loans = [
        (&TRADITIONAL_LOANS[..], c.traditional_loans),
        (&NONTRADITIONAL_LOANS[..], c.nontraditional_loans),
    ];
    for (pool, mean) in loans {
        let n = poisson(rng, mean) as usize;
        for name in pick_distinct(rng, pool, n) {
            let payment = pounds(c.loan_payment_gbp) * lognormal_factor(rng, 0.4);
            recurring.push(Recurring {
                schedule: Schedule::DayOfMonth(rng.random_range(1..=28)),
                amount: payment,
                jitter: 0.0,
                category: Category::LoanRepayments,
                description: format!("{name} REPAYMENT"),
                only_month: None,
                salary: false,
            });
            recurring.push(Recurring {
                schedule: Schedule::DayOfMonth(rng.random_range(1..=28)),
                amount: payment * 12.0,
                jitter: 0.0,
                category: Category::LoansReceived,
                description: format!("{name} ADVANCE"),
                only_month: Some(rng.random_range(0..months)),
                salary: false,
            });
        }
    }
    if rng.random_bool(c.payday_probability) {
        let lender = PAYDAY_LENDERS.choose(rng).expect("non-empty").to_string();
        random.push(RandomFlow {
            per_month: 0.6,
            amount: pounds(200.0),
            spread: 0.3,
            category: Category::LoansReceived,
            descriptions: vec![lender.clone()],
        });
        random.push(RandomFlow {
            per_month: 0.6,
            amount: pounds(260.0),
            spread: 0.3,
            category: Category::LoanRepayments,
            descriptions: vec![format!("{lender} REPAYMENT")],
        });
    }

    // planning
    let planning = [
        (p.insurance_probability, p.insurance_gbp, Category::Insurance),
        (p.pension_probability, p.pension_gbp, Category::Pension),
        (p.savings_probability, p.savings_gbp, Category::SavingsInvestments),
    ];
    for (prob, gbp, category) in planning {
        if rng.random_bool(prob) {
            let description = match category {
                Category::SavingsInvestments => "VANGUARD ISA".to_string(),
                _ => merchants(category).choose(rng).expect("non-empty").to_string(),
            };
            recurring.push(Recurring {
                schedule: Schedule::DayOfMonth(rng.random_range(1..=28)),
                amount: pounds(gbp) * lognormal_factor(rng, 0.3),
                jitter: 0.0,
                category,
                description,
                only_month: None,
                salary: false,
            });
        }
    }

    // informal inflows
    let o = &persona.other_income;
    if o.transfers_per_month > 0.0 {
        random.push(RandomFlow {
            per_month: o.transfers_per_month * lognormal_factor(rng, 0.5),
            amount: pounds(o.transfer_gbp),
            spread: 0.5,
            category: Category::CreditBankTransfers,
            descriptions: FRIENDS.iter().map(|f| format!("MOBILE TRANSFER FROM {f}")).collect(),
        });
    }

    let bal = &persona.balance;
    Plan {
        recurring,
        random,
        target: pounds(normal(rng, bal.target_gbp, bal.target_sd_gbp)),
        monthly_sd: pounds(bal.monthly_sd_gbp),
    }
}

/// Signed amount in pence for a planned flow. The category decides the
/// sign; gambling flows carry their own (negative stakes, positive wins).
fn signed_amount(category: Category, pence: f64) -> i64 {
    let magnitude = (pence.abs().round() as i64).max(1);
    let inflow = match category {
        Category::Earnings
        | Category::PensionIncome
        | Category::LoansReceived
        | Category::CreditBankTransfers => true,
        Category::Gambling => pence > 0.0,
        c if c.benefit_type().is_some() => true,
        _ => false,
    };
    if inflow {
        magnitude
    } else {
        -magnitude
    }
}

/// Salary amounts must look like pay: at least the salary floor and not a
/// round number of pounds tens.
fn salary_amount(pence: f64) -> i64 {
    let mut a = (pence.round() as i64).max(SALARY_MIN_PENCE + 1);
    if a % SALARY_ROUND_PENCE == 0 {
        a += 37;
    }
    a
}

fn days_in_month(first: NaiveDate) -> u32 {
    let next = first.checked_add_months(chrono::Months::new(1)).expect("in range");
    (next - first).num_days() as u32
}

pub(super) fn generate_account(index: usize, cfg: &CohortConfig, set: &PersonaSet) -> (Vec<Transaction>, GroundTruth) {
    let mut rng = rng::stream(cfg.seed, "synthgen.account", index as u64);
    let account_id = format!("ACC{index:06}");

    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut persona = set.persona.iter().rfind(|p| p.mix_weight > 0.0).expect("positive weight");
    for p in &set.persona {
        acc += p.mix_weight;
        if p.mix_weight > 0.0 && u < acc {
            persona = p;
            break;
        }
    }

    let a = &set.attributes;
    let female = rng.random_bool(a.female_probability);
    let attrs = Attributes {
        female,
        has_child: rng.random_bool(if female { a.child_probability_female } else { a.child_probability_male }),
        disability: rng.random_bool(a.disability_probability),
        carer: rng.random_bool(a.carer_probability),
    };
    let control = rng::stream(cfg.seed, "synthgen.control", index as u64).random_bool(a.control_probability);
    let age = normal(&mut rng, persona.age.mean, persona.age.sd).round().clamp(18.0, 90.0) as u32;

    let months = cfg.months_per_account as usize;
    let later_window = index % 5 == 4;
    let end_key = month_key(super::FIRST_END_MONTH) + if later_window { 3 } else { 0 } + rng.random_range(0..3);
    let start_key = end_key - months as i32 + 1;

    let plan = build_plan(&mut rng, persona, set, &attrs, cfg.planted_proxy_strength, months);

    let mut balance = plan.target.round() as i64;
    let mut out = Vec::with_capacity(months * 30);
    let mut events: Vec<(u32, i64, Category, String)> = Vec::new();
    for m in 0..months {
        let first = month_start(start_key + m as i32);
        let ndays = days_in_month(first);
        events.clear();
        for r in &plan.recurring {
            if r.only_month.is_some_and(|only| only != m) {
                continue;
            }
            for day in 1..=ndays {
                let date = first.with_day(day).expect("valid day");
                if r.schedule.fires(date) {
                    let pence = r.amount * (1.0 + normal(&mut rng, 0.0, r.jitter));
                    let amount =
                        if r.salary { salary_amount(pence) } else { signed_amount(r.category, pence) };
                    events.push((day, amount, r.category, r.description.clone()));
                }
            }
        }
        for f in &plan.random {
            for _ in 0..poisson(&mut rng, f.per_month) {
                let day = rng.random_range(1..=ndays);
                let pence = f.amount * lognormal_factor(&mut rng, f.spread);
                let description = f.descriptions.choose(&mut rng).expect("non-empty").clone();
                events.push((day, signed_amount(f.category, pence), f.category, description));
            }
        }
        while events.len() < MIN_MONTHLY_TRANSACTIONS {
            let pence = rng.random_range(300..1500) as f64;
            events.push((rng.random_range(1..=ndays), signed_amount(Category::GroceriesHousekeeping, pence), Category::GroceriesHousekeeping, "CO-OP FOOD".into()));
        }

        // steer the running balance back towards the month's target
        let net: i64 = events.iter().map(|e| e.1).sum();
        let target = plan.target + normal(&mut rng, 0.0, plan.monthly_sd);
        let transfer = (target - balance as f64 - net as f64 / 2.0).round() as i64;
        if transfer.abs() >= 100 {
            let description = if transfer > 0 { "TRANSFER FROM SAVINGS" } else { "TRANSFER TO SAVINGS" };
            events.insert(0, (1, transfer, Category::InternalTransfers, description.into()));
        }
        events.sort_by_key(|e| e.0);

        let month_begin = out.len();
        let mut overdrawn = false;
        let mut i = 0;
        while i < events.len() {
            let day = events[i].0;
            while i < events.len() && events[i].0 == day {
                let (_, amount, category, ref description) = events[i];
                balance += amount;
                out.push(Transaction {
                    account_id: account_id.clone(),
                    date: first.with_day(day).expect("valid day"),
                    amount,
                    description: description.clone(),
                    category,
                    balance_after: balance,
                });
                i += 1;
            }
            overdrawn |= balance < 0;
        }
        if overdrawn {
            let fee = -rng.random_range(500..1500);
            balance += fee;
            out.push(Transaction {
                account_id: account_id.clone(),
                date: first.with_day(ndays).expect("valid day"),
                amount: fee,
                description: "OVERDRAFT FEE".into(),
                category: Category::OverdraftFee,
                balance_after: balance,
            });
        }
        debug_assert!(out.len() - month_begin >= MIN_MONTHLY_TRANSACTIONS);
    }

    let truth = GroundTruth {
        account_id,
        persona: persona.name.clone(),
        gender: if female { Gender::Female } else { Gender::Male },
        age,
        disability: attrs.disability,
        carer: attrs.carer,
        has_child: attrs.has_child,
        control,
    };
    (out, truth)
}

pub(super) fn demographics_for(truth: &GroundTruth) -> Demographics {
    let residential_status = match truth.persona.as_str() {
        "financially_secure" | "financially_resilient" => "homeowner",
        "young_challenged" => "with_parents",
        _ => "tenant",
    };
    Demographics {
        gender: truth.gender,
        age: Some(truth.age),
        residential_status: Some(residential_status.into()),
        employment_length_months: None,
    }
}
