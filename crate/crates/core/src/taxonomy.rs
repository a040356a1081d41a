//! The thirteen symptom categories used to partition sites, dictionary
//! entries and evaluation queries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Category {
    Abdominal,
    Cardiovascular,
    Digestive,
    HeadAndNeck,
    HemicImmune,
    Musculoskeletal,
    Nervous,
    NeurologicalPhysiological,
    NutritionMetabolism,
    Reproductive,
    RespiratoryChest,
    SkinIntegumentary,
    Urinary,
}

impl Category {
    pub const ALL: [Category; 13] = [
        Category::Abdominal,
        Category::Cardiovascular,
        Category::Digestive,
        Category::HeadAndNeck,
        Category::HemicImmune,
        Category::Musculoskeletal,
        Category::Nervous,
        Category::NeurologicalPhysiological,
        Category::NutritionMetabolism,
        Category::Reproductive,
        Category::RespiratoryChest,
        Category::SkinIntegumentary,
        Category::Urinary,
    ];

    /// Human-readable name, also used as the directory service type of the
    /// web agent responsible for the category.
    pub fn name(self) -> &'static str {
        match self {
            Category::Abdominal => "abdominal symptom",
            Category::Cardiovascular => "cardiovascular system symptom",
            Category::Digestive => "digestive system symptom",
            Category::HeadAndNeck => "head and neck symptom",
            Category::HemicImmune => "hemic and immune system",
            Category::Musculoskeletal => "musculoskeleton system symptom",
            Category::Nervous => "nervous system symptom",
            Category::NeurologicalPhysiological => "neurological and physiological symptom",
            Category::NutritionMetabolism => "nutrition, metabolism and development symptom",
            Category::Reproductive => "reproductive system symptom",
            Category::RespiratoryChest => "respiratory and chest symptom",
            Category::SkinIntegumentary => "skin and intergumentary tissue symptom",
            Category::Urinary => "urinary system symptom",
        }
    }

    /// Short identifier without spaces or commas, used in flat file formats.
    pub fn slug(self) -> &'static str {
        match self {
            Category::Abdominal => "abdominal",
            Category::Cardiovascular => "cardiovascular",
            Category::Digestive => "digestive",
            Category::HeadAndNeck => "head-neck",
            Category::HemicImmune => "hemic-immune",
            Category::Musculoskeletal => "musculoskeletal",
            Category::Nervous => "nervous",
            Category::NeurologicalPhysiological => "neuro-physiological",
            Category::NutritionMetabolism => "nutrition-metabolism",
            Category::Reproductive => "reproductive",
            Category::RespiratoryChest => "respiratory-chest",
            Category::SkinIntegumentary => "skin-integumentary",
            Category::Urinary => "urinary",
        }
    }

    pub fn index(self) -> usize {
        Category::ALL.iter().position(|c| *c == self).unwrap()
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    /// Accepts either the slug or the full name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Category::ALL
            .into_iter()
            .find(|c| c.slug() == s || c.name() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

impl TryFrom<String> for Category {
    type Error = UnknownCategory;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Category> for String {
    fn from(c: Category) -> String {
        c.slug().to_string()
    }
}
