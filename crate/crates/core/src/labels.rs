//! Topic and sentiment label sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The 22 issue topics, in stable index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TopicLabel {
    #[serde(rename = "Income Inequality")]
    IncomeInequality,
    #[serde(rename = "Environment/Energy")]
    EnvironmentEnergy,
    #[serde(rename = "Jobs/Employment")]
    JobsEmployment,
    #[serde(rename = "Guns")]
    Guns,
    #[serde(rename = "Racial Issues")]
    RacialIssues,
    #[serde(rename = "Foreign Policy/National Security")]
    ForeignPolicy,
    #[serde(rename = "LGBT Issues")]
    LgbtIssues,
    #[serde(rename = "Ethics")]
    Ethics,
    #[serde(rename = "Education")]
    Education,
    #[serde(rename = "Financial Regulation")]
    FinancialRegulation,
    #[serde(rename = "Budget/Taxation")]
    BudgetTaxation,
    #[serde(rename = "Veterans")]
    Veterans,
    #[serde(rename = "Campaign Finance")]
    CampaignFinance,
    #[serde(rename = "Surveillance/Privacy")]
    SurveillancePrivacy,
    #[serde(rename = "Drugs")]
    Drugs,
    #[serde(rename = "Justice")]
    Justice,
    #[serde(rename = "Abortion")]
    Abortion,
    #[serde(rename = "Immigration")]
    Immigration,
    #[serde(rename = "Trade")]
    Trade,
    #[serde(rename = "Health Care")]
    HealthCare,
    #[serde(rename = "Economy")]
    Economy,
    #[serde(rename = "Other")]
    Other,
}

impl TopicLabel {
    pub const ALL: [TopicLabel; 22] = [
        TopicLabel::IncomeInequality,
        TopicLabel::EnvironmentEnergy,
        TopicLabel::JobsEmployment,
        TopicLabel::Guns,
        TopicLabel::RacialIssues,
        TopicLabel::ForeignPolicy,
        TopicLabel::LgbtIssues,
        TopicLabel::Ethics,
        TopicLabel::Education,
        TopicLabel::FinancialRegulation,
        TopicLabel::BudgetTaxation,
        TopicLabel::Veterans,
        TopicLabel::CampaignFinance,
        TopicLabel::SurveillancePrivacy,
        TopicLabel::Drugs,
        TopicLabel::Justice,
        TopicLabel::Abortion,
        TopicLabel::Immigration,
        TopicLabel::Trade,
        TopicLabel::HealthCare,
        TopicLabel::Economy,
        TopicLabel::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            TopicLabel::IncomeInequality => "Income Inequality",
            TopicLabel::EnvironmentEnergy => "Environment/Energy",
            TopicLabel::JobsEmployment => "Jobs/Employment",
            TopicLabel::Guns => "Guns",
            TopicLabel::RacialIssues => "Racial Issues",
            TopicLabel::ForeignPolicy => "Foreign Policy/National Security",
            TopicLabel::LgbtIssues => "LGBT Issues",
            TopicLabel::Ethics => "Ethics",
            TopicLabel::Education => "Education",
            TopicLabel::FinancialRegulation => "Financial Regulation",
            TopicLabel::BudgetTaxation => "Budget/Taxation",
            TopicLabel::Veterans => "Veterans",
            TopicLabel::CampaignFinance => "Campaign Finance",
            TopicLabel::SurveillancePrivacy => "Surveillance/Privacy",
            TopicLabel::Drugs => "Drugs",
            TopicLabel::Justice => "Justice",
            TopicLabel::Abortion => "Abortion",
            TopicLabel::Immigration => "Immigration",
            TopicLabel::Trade => "Trade",
            TopicLabel::HealthCare => "Health Care",
            TopicLabel::Economy => "Economy",
            TopicLabel::Other => "Other",
        }
    }

    /// File-name friendly form, e.g. `environment_energy`.
    pub fn slug(self) -> String {
        let mut slug = String::new();
        for c in self.name().chars() {
            if c.is_ascii_alphanumeric() {
                slug.push(c.to_ascii_lowercase());
            } else if !slug.ends_with('_') {
                slug.push('_');
            }
        }
        slug
    }
}

impl fmt::Display for TopicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopicLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        TopicLabel::ALL
            .iter()
            .copied()
            .find(|t| t.name().eq_ignore_ascii_case(s) || t.slug() == s)
            .ok_or_else(|| Error::Lookup(format!("unknown topic {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Negative,
    Neutral,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Positive,
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SentimentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        SentimentLabel::ALL
            .iter()
            .copied()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Lookup(format!("unknown sentiment {s:?}")))
    }
}
