//! Built-in medical vocabulary behind the synthetic corpus and the fixture
//! dictionary.

use crate::taxonomy::Category;

pub struct CategoryVocab {
    pub category: Category,
    pub diseases: &'static [&'static str],
    pub symptoms: &'static [&'static str],
    pub drugs: &'static [&'static str],
}

pub const VOCAB: [CategoryVocab; 13] = [
    CategoryVocab {
        category: Category::Abdominal,
        diseases: &["appendicitis", "peritonitis", "hernia", "abdominal cramps", "gallstones", "abdominal pain"],
        symptoms: &["bloating", "nausea", "vomiting", "stomach", "belly", "tenderness"],
        drugs: &["ibuprofen", "hyoscine", "omeprazole", "ursodiol", "ceftriaxone", "metronidazole"],
    },
    CategoryVocab {
        category: Category::Cardiovascular,
        diseases: &["hypertension", "arrhythmia", "angina", "heart failure", "tachycardia", "rheumatic fever"],
        symptoms: &["palpitations", "heart", "pressure", "swelling", "fainting", "pulse"],
        drugs: &["lisinopril", "amlodipine", "metoprolol", "nitroglycerin", "furosemide", "warfarin", "digoxin"],
    },
    CategoryVocab {
        category: Category::Digestive,
        diseases: &["gastritis", "diarrhea", "constipation", "colitis", "reflux", "typhoid fever"],
        symptoms: &["heartburn", "indigestion", "bowel", "flatulence", "appetite", "stool"],
        drugs: &["loperamide", "lactulose", "mesalamine", "famotidine", "pantoprazole", "simethicone"],
    },
    CategoryVocab {
        category: Category::HeadAndNeck,
        diseases: &["migraine", "tonsillitis", "sinusitis", "headache", "goiter", "laryngitis"],
        symptoms: &["throat", "neck", "hoarseness", "earache", "congestion", "jaw"],
        drugs: &["sumatriptan", "amoxicillin", "levothyroxine", "paracetamol", "fluticasone"],
    },
    CategoryVocab {
        category: Category::HemicImmune,
        diseases: &["anemia", "leukemia", "lymphoma", "lupus", "hemophilia", "neutropenia"],
        symptoms: &["bruising", "bleeding", "pallor", "infection", "lymph", "immunity"],
        drugs: &["ferrous sulfate", "hydroxychloroquine", "rituximab", "filgrastim", "folic acid"],
    },
    CategoryVocab {
        category: Category::Musculoskeletal,
        diseases: &["arthritis", "osteoporosis", "tendinitis", "back pain", "gout", "bursitis"],
        symptoms: &["joint", "stiffness", "muscle", "bone", "fracture", "spasm"],
        drugs: &["naproxen", "alendronate", "colchicine", "allopurinol", "diclofenac"],
    },
    CategoryVocab {
        category: Category::Nervous,
        diseases: &["epilepsy", "neuropathy", "sciatica", "meningitis", "neuralgia", "paralysis"],
        symptoms: &["numbness", "tingling", "seizure", "weakness", "tremor", "nerve"],
        drugs: &["gabapentin", "levetiracetam", "carbamazepine", "pregabalin", "valproate"],
    },
    CategoryVocab {
        category: Category::NeurologicalPhysiological,
        diseases: &["insomnia", "anxiety", "depression", "dementia", "vertigo", "fatigue syndrome"],
        symptoms: &["sleep", "memory", "mood", "dizziness", "confusion", "fatigue"],
        drugs: &["melatonin", "sertraline", "donepezil", "betahistine", "zolpidem"],
    },
    CategoryVocab {
        category: Category::NutritionMetabolism,
        diseases: &["diabetes", "obesity", "malnutrition", "hypothyroidism", "rickets", "dehydration"],
        symptoms: &["thirst", "weight", "growth", "sugar", "hunger", "metabolism"],
        drugs: &["metformin", "insulin", "orlistat", "vitamin d", "oral rehydration salts"],
    },
    CategoryVocab {
        category: Category::Reproductive,
        diseases: &["endometriosis", "infertility", "prostatitis", "dysmenorrhea", "menopause", "mastitis"],
        symptoms: &["menstruation", "pelvic", "ovulation", "discharge", "hormone", "pregnancy"],
        drugs: &["clomiphene", "tamsulosin", "estradiol", "progesterone", "cephalexin"],
    },
    CategoryVocab {
        category: Category::RespiratoryChest,
        diseases: &[
            "asthma",
            "bronchitis",
            "pneumonia",
            "influenza fever",
            "chest pain",
            "tuberculosis",
            "hay fever",
        ],
        symptoms: &["cough", "wheezing", "breath", "sputum", "chest", "sneezing"],
        drugs: &["salbutamol", "oseltamivir", "azithromycin", "isoniazid", "budesonide", "cetirizine"],
    },
    CategoryVocab {
        category: Category::SkinIntegumentary,
        diseases: &["eczema", "psoriasis", "dermatitis", "acne", "urticaria", "scarlet fever"],
        symptoms: &["rash", "itching", "blister", "redness", "scaling", "skin"],
        drugs: &["hydrocortisone", "tretinoin", "calcipotriol", "doxycycline", "loratadine"],
    },
    CategoryVocab {
        category: Category::Urinary,
        diseases: &["cystitis", "kidney stones", "incontinence", "nephritis", "urinary infection", "pyelonephritis"],
        symptoms: &["urination", "bladder", "kidney", "urine", "flank", "burning"],
        drugs: &["nitrofurantoin", "trimethoprim", "oxybutynin", "tamsulosin", "ciprofloxacin"],
    },
];

/// Cross-category symptom words.
pub const GENERAL_SYMPTOMS: &[(&str, &[Category])] = &[
    (
        "fever",
        &[
            Category::RespiratoryChest,
            Category::Cardiovascular,
            Category::Digestive,
            Category::SkinIntegumentary,
        ],
    ),
    ("pain", &[Category::Abdominal, Category::Musculoskeletal, Category::RespiratoryChest]),
    ("ache", &[Category::HeadAndNeck, Category::Musculoskeletal]),
    ("inflammation", &[Category::Musculoskeletal, Category::SkinIntegumentary, Category::Urinary]),
    ("chronic", &[]),
    ("acute", &[]),
    ("severe", &[]),
    ("mild", &[]),
];

/// Symmetric single-word synonym pairs (English).
pub const SYNONYMS_EN: &[(&str, &str)] = &[
    ("fever", "pyrexia"),
    ("anemia", "anaemia"),
    ("diarrhea", "diarrhoea"),
    ("tumor", "tumour"),
    ("hypertension", "hyperpiesia"),
    ("itching", "pruritus"),
    ("headache", "cephalalgia"),
    ("heartburn", "pyrosis"),
    ("fainting", "syncope"),
    ("bruising", "ecchymosis"),
    ("sneezing", "sternutation"),
    ("dizziness", "giddiness"),
    ("belly", "tummy"),
    ("urination", "micturition"),
];

/// Related term pairs and their labels.
pub const RELATIONS_EN: &[(&str, &str, &str)] = &[
    ("fever", "cough", "co-symptom"),
    ("chest", "pain", "location-of"),
    ("back", "pain", "location-of"),
    ("abdominal", "pain", "location-of"),
    ("heart", "failure", "organ-of"),
    ("kidney", "stones", "organ-of"),
    ("nausea", "vomiting", "co-symptom"),
    ("rash", "itching", "co-symptom"),
    ("joint", "stiffness", "co-symptom"),
    ("thirst", "urination", "co-symptom"),
    ("asthma", "wheezing", "symptom-of"),
    ("migraine", "headache", "symptom-of"),
    ("influenza", "fever", "symptom-of"),
];

/// The three stopwords named for the modification agent plus a short
/// standard English stoplist.
pub const STOPWORDS_EN: &[&str] = &[
    "between", "do", "on", "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "have", "has", "i",
    "in", "is", "it", "me", "my", "of", "or", "the", "to", "with", "what", "how", "about", "after",
];

pub const STOPWORDS_BG: &[&str] = &["и", "на", "в", "с", "за", "от", "между", "по", "не", "да"];

/// Bulgarian entries: term, categories, synonyms.
pub const TERMS_BG: &[(&str, &[Category], &[&str])] = &[
    ("треска", &[Category::RespiratoryChest, Category::Digestive], &["температура"]),
    ("температура", &[Category::RespiratoryChest, Category::Digestive], &["треска"]),
    ("кашлица", &[Category::RespiratoryChest], &[]),
    ("болка", &[Category::Abdominal, Category::Musculoskeletal], &[]),
    ("гръден", &[Category::RespiratoryChest], &[]),
    ("гърди", &[Category::RespiratoryChest], &[]),
    ("астма", &[Category::RespiratoryChest], &[]),
    ("бронхит", &[Category::RespiratoryChest], &[]),
    ("пневмония", &[Category::RespiratoryChest], &[]),
    ("грип", &[Category::RespiratoryChest], &["инфлуенца"]),
    ("инфлуенца", &[Category::RespiratoryChest], &["грип"]),
    ("главоболие", &[Category::HeadAndNeck], &[]),
    ("мигрена", &[Category::HeadAndNeck], &[]),
    ("гърло", &[Category::HeadAndNeck], &[]),
    ("сърце", &[Category::Cardiovascular], &[]),
    ("хипертония", &[Category::Cardiovascular], &[]),
    ("аритмия", &[Category::Cardiovascular], &[]),
    ("гастрит", &[Category::Digestive], &[]),
    ("диария", &[Category::Digestive], &[]),
    ("запек", &[Category::Digestive], &[]),
    ("корем", &[Category::Abdominal], &[]),
    ("гадене", &[Category::Abdominal], &[]),
    ("анемия", &[Category::HemicImmune], &["малокръвие"]),
    ("малокръвие", &[Category::HemicImmune], &["анемия"]),
    ("левкемия", &[Category::HemicImmune], &[]),
    ("артрит", &[Category::Musculoskeletal], &[]),
    ("подагра", &[Category::Musculoskeletal], &[]),
    ("става", &[Category::Musculoskeletal], &[]),
    ("епилепсия", &[Category::Nervous], &[]),
    ("изтръпване", &[Category::Nervous], &[]),
    ("безсъние", &[Category::NeurologicalPhysiological], &[]),
    ("тревожност", &[Category::NeurologicalPhysiological], &[]),
    ("световъртеж", &[Category::NeurologicalPhysiological], &[]),
    ("диабет", &[Category::NutritionMetabolism], &[]),
    ("затлъстяване", &[Category::NutritionMetabolism], &[]),
    ("жажда", &[Category::NutritionMetabolism], &[]),
    ("безплодие", &[Category::Reproductive], &[]),
    ("менопауза", &[Category::Reproductive], &[]),
    ("екзема", &[Category::SkinIntegumentary], &[]),
    ("обрив", &[Category::SkinIntegumentary], &[]),
    ("сърбеж", &[Category::SkinIntegumentary], &[]),
    ("цистит", &[Category::Urinary], &[]),
    ("бъбрек", &[Category::Urinary], &[]),
    ("уриниране", &[Category::Urinary], &[]),
];

pub fn vocab_for(category: Category) -> &'static CategoryVocab {
    &VOCAB[category.index()]
}
