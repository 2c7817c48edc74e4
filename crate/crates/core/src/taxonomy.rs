//! Closed category taxonomy.
//!
//! Upstream categorisers use a few dozen labels; fvkit keeps a smaller closed
//! set that still has a home for every input the feature formulas read.
//! Unknown category strings are rejected at ingest time.
//!
//! | source label                         | code(s)                                   |
//! |--------------------------------------|-------------------------------------------|
//! | earnings                             | `earnings`                                |
//! | credit bank transfers                | `credit_bank_transfers`                   |
//! | internal transfers                   | `internal_transfers`                      |
//! | debit internal transfers             | `debit_internal_transfers`                |
//! | returned direct debits               | `returned_direct_debits`                  |
//! | returns / refunds                    | `returns`                                 |
//! | debt management and insolvency       | `debt_management_insolvency`              |
//! | savings & investments                | `savings_investments`                     |
//! | loans (received / repaid)            | `loans_received`, `loan_repayments`       |
//! | pension (received / contributed)     | `pension_income`, `pension`               |
//! | benefits, by subtype                 | `benefit_<subtype>`                       |
//! | bank overdraft charges               | `overdraft_fee`                           |
//! | everything else not listed above     | `other_expenditure`                       |
//!
//! The remaining spending categories map one-to-one onto codes of the same
//! name. [`TAXONOMY`] is the single table that assigns each code its
//! [`FlowClass`]; edit it to move a category between fixed and flexible.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlowClass {
    Fixed,
    Flexible,
    Inflow,
    Transfer,
    Excluded,
}

impl FlowClass {
    pub fn is_expenditure(self) -> bool {
        matches!(self, FlowClass::Fixed | FlowClass::Flexible)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BenefitType {
    Disability,
    Carer,
    Child,
    ChildTaxCredit,
    WorkingTaxCredit,
    UniversalCredit,
    EmploymentSupport,
}

impl BenefitType {
    pub const ALL: [BenefitType; 7] = [
        BenefitType::Disability,
        BenefitType::Carer,
        BenefitType::Child,
        BenefitType::ChildTaxCredit,
        BenefitType::WorkingTaxCredit,
        BenefitType::UniversalCredit,
        BenefitType::EmploymentSupport,
    ];

    pub fn code(self) -> &'static str {
        match self {
            BenefitType::Disability => "disability",
            BenefitType::Carer => "carer",
            BenefitType::Child => "child",
            BenefitType::ChildTaxCredit => "child_tax_credit",
            BenefitType::WorkingTaxCredit => "working_tax_credit",
            BenefitType::UniversalCredit => "universal_credit",
            BenefitType::EmploymentSupport => "employment_support",
        }
    }

    pub fn from_code(code: &str) -> Option<BenefitType> {
        BenefitType::ALL.into_iter().find(|b| b.code() == code)
    }

    pub fn category(self) -> Category {
        match self {
            BenefitType::Disability => Category::BenefitDisability,
            BenefitType::Carer => Category::BenefitCarer,
            BenefitType::Child => Category::BenefitChild,
            BenefitType::ChildTaxCredit => Category::BenefitChildTaxCredit,
            BenefitType::WorkingTaxCredit => Category::BenefitWorkingTaxCredit,
            BenefitType::UniversalCredit => Category::BenefitUniversalCredit,
            BenefitType::EmploymentSupport => Category::BenefitEmploymentSupport,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    // inflows
    Earnings,
    CreditBankTransfers,
    LoansReceived,
    PensionIncome,
    BenefitDisability,
    BenefitCarer,
    BenefitChild,
    BenefitChildTaxCredit,
    BenefitWorkingTaxCredit,
    BenefitUniversalCredit,
    BenefitEmploymentSupport,
    // transfers
    InternalTransfers,
    DebitInternalTransfers,
    SavingsInvestments,
    // excluded from income and spend
    ReturnedDirectDebits,
    Returns,
    OverdraftFee,
    // fixed
    Housing,
    Utilities,
    Insurance,
    Pension,
    Subscriptions,
    LoanRepayments,
    CreditCardPayments,
    ChildSchool,
    TransportFuel,
    // flexible
    DebtManagementInsolvency,
    Cash,
    CharityDonation,
    EatingOutTakeaways,
    FashionBeauty,
    FunLeisure,
    GroceriesHousekeeping,
    HealthFitness,
    MedicalHealth,
    Gambling,
    OtherExpenditure,
}

/// Code, category and flow class for every member of the taxonomy.
pub const TAXONOMY: [(Category, &str, FlowClass); 37] = [
    (Category::Earnings, "earnings", FlowClass::Inflow),
    (Category::CreditBankTransfers, "credit_bank_transfers", FlowClass::Inflow),
    (Category::LoansReceived, "loans_received", FlowClass::Inflow),
    (Category::PensionIncome, "pension_income", FlowClass::Inflow),
    (Category::BenefitDisability, "benefit_disability", FlowClass::Inflow),
    (Category::BenefitCarer, "benefit_carer", FlowClass::Inflow),
    (Category::BenefitChild, "benefit_child", FlowClass::Inflow),
    (Category::BenefitChildTaxCredit, "benefit_child_tax_credit", FlowClass::Inflow),
    (Category::BenefitWorkingTaxCredit, "benefit_working_tax_credit", FlowClass::Inflow),
    (Category::BenefitUniversalCredit, "benefit_universal_credit", FlowClass::Inflow),
    (Category::BenefitEmploymentSupport, "benefit_employment_support", FlowClass::Inflow),
    (Category::InternalTransfers, "internal_transfers", FlowClass::Transfer),
    (Category::DebitInternalTransfers, "debit_internal_transfers", FlowClass::Transfer),
    (Category::SavingsInvestments, "savings_investments", FlowClass::Transfer),
    (Category::ReturnedDirectDebits, "returned_direct_debits", FlowClass::Excluded),
    (Category::Returns, "returns", FlowClass::Excluded),
    (Category::OverdraftFee, "overdraft_fee", FlowClass::Excluded),
    (Category::Housing, "housing", FlowClass::Fixed),
    (Category::Utilities, "utilities", FlowClass::Fixed),
    (Category::Insurance, "insurance", FlowClass::Fixed),
    (Category::Pension, "pension", FlowClass::Fixed),
    (Category::Subscriptions, "subscriptions", FlowClass::Fixed),
    (Category::LoanRepayments, "loan_repayments", FlowClass::Fixed),
    (Category::CreditCardPayments, "credit_card_payments", FlowClass::Fixed),
    (Category::ChildSchool, "child_school", FlowClass::Fixed),
    (Category::TransportFuel, "transport_fuel", FlowClass::Fixed),
    (Category::DebtManagementInsolvency, "debt_management_insolvency", FlowClass::Flexible),
    (Category::Cash, "cash", FlowClass::Flexible),
    (Category::CharityDonation, "charity_donation", FlowClass::Flexible),
    (Category::EatingOutTakeaways, "eating_out_takeaways", FlowClass::Flexible),
    (Category::FashionBeauty, "fashion_beauty", FlowClass::Flexible),
    (Category::FunLeisure, "fun_leisure", FlowClass::Flexible),
    (Category::GroceriesHousekeeping, "groceries_housekeeping", FlowClass::Flexible),
    (Category::HealthFitness, "health_fitness", FlowClass::Flexible),
    (Category::MedicalHealth, "medical_health", FlowClass::Flexible),
    (Category::Gambling, "gambling", FlowClass::Flexible),
    (Category::OtherExpenditure, "other_expenditure", FlowClass::Flexible),
];

impl Category {
    pub const COUNT: usize = TAXONOMY.len();

    /// Position in [`TAXONOMY`]; stable and dense, used for per-category arrays.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn all() -> impl Iterator<Item = Category> {
        TAXONOMY.iter().map(|(c, _, _)| *c)
    }

    pub fn code(self) -> &'static str {
        TAXONOMY[self.index()].1
    }

    pub fn flow_class(self) -> FlowClass {
        TAXONOMY[self.index()].2
    }

    pub fn from_code(code: &str) -> Option<Category> {
        TAXONOMY.iter().find(|(_, c, _)| *c == code).map(|(cat, _, _)| *cat)
    }

    pub fn benefit_type(self) -> Option<BenefitType> {
        BenefitType::ALL.into_iter().find(|b| b.category() == self)
    }

    /// Categories whose inflows are salary candidates.
    pub fn is_salary_source(self) -> bool {
        matches!(self, Category::Earnings | Category::CreditBankTransfers)
    }

    /// Expenditure categories (fixed and flexible), in taxonomy order.
    pub fn expenditure() -> impl Iterator<Item = Category> {
        Category::all().filter(|c| c.flow_class().is_expenditure())
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::from_code(s.trim()).ok_or_else(|| format!("unknown category '{}'", s.trim()))
    }
}
