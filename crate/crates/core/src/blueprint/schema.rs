use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Shape of one field of a task payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldType {
    Text,
    Int,
    /// `[int, int]`
    Pair,
    /// `[[int, int], ...]`
    PairList,
    /// `[[int, ...], ...]`, square
    Matrix,
    /// `[[row, column], ...]`
    CellList,
    /// `[int, ...]` of row or column indices
    IndexList,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaDef {
    pub name: String,
    pub fields: BTreeMap<String, FieldType>,
}

impl SchemaDef {
    pub fn new(name: impl Into<String>, fields: &[(&str, FieldType)]) -> Self {
        Self {
            name: name.into(),
            fields: fields
                .iter()
                .map(|&(f, t)| (f.to_string(), t))
                .collect(),
        }
    }

    pub fn field(&self, name: &str) -> Option<FieldType> {
        self.fields.get(name).copied()
    }
}

/// Named payload schemas that task specs refer to.
#[derive(Debug, Clone, Default)]
pub struct SchemaRegistry {
    schemas: BTreeMap<String, SchemaDef>,
}

impl SchemaRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, def: SchemaDef) -> &mut Self {
        self.schemas.insert(def.name.clone(), def);
        self
    }

    pub fn get(&self, name: &str) -> Option<&SchemaDef> {
        self.schemas.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.schemas.contains_key(name)
    }

    /// Schemas of every payload exchanged in the knapsack and assignment
    /// blueprints.
    pub fn standard() -> Self {
        use FieldType::*;
        let mut r = Self::new();
        for def in [
            SchemaDef::new(
                "ksp_instance",
                &[("id", Text), ("items", PairList), ("capacity", Int)],
            ),
            SchemaDef::new("ksp_answer", &[("max_value", Int)]),
            SchemaDef::new("state_set", &[("c_list", PairList)]),
            SchemaDef::new("item_pick", &[("s_item", Pair)]),
            SchemaDef::new("worker_request", &[("c_list", PairList), ("s_item", Pair)]),
            SchemaDef::new("worker_response", &[("n_list", PairList)]),
            SchemaDef::new("trimmer_request", &[("n_list", PairList), ("capacity", Int)]),
            SchemaDef::new("trimmer_response", &[("t_list", PairList)]),
            SchemaDef::new("union_request", &[("c_list", PairList), ("t_list", PairList)]),
            SchemaDef::new("tap_instance", &[("id", Text), ("cost_matrix", Matrix)]),
            SchemaDef::new("tap_answer", &[("optimal_cost", Int)]),
            SchemaDef::new("matrix_request", &[("matrix", Matrix)]),
            SchemaDef::new("reduced_matrix", &[("reduced_matrix", Matrix)]),
            SchemaDef::new("matcher_response", &[("largest_collection", CellList)]),
            SchemaDef::new("painter_request", &[("matrix", Matrix), ("collection", CellList)]),
            SchemaDef::new(
                "cover_response",
                &[("collum_collection", IndexList), ("row_collection", IndexList)],
            ),
            SchemaDef::new(
                "normalizer_request",
                &[
                    ("matrix", Matrix),
                    ("collumn_collection", IndexList),
                    ("row_collection", IndexList),
                ],
            ),
            SchemaDef::new("normalizer_response", &[("normalized_matrix", Matrix)]),
            SchemaDef::new("tap_report_request", &[("matrix", Matrix), ("collection", CellList)]),
            SchemaDef::new("tap_report_response", &[("total_value", Int)]),
        ] {
            r.register(def);
        }
        r
    }
}
