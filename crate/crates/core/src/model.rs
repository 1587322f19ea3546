// Copyright 2026 The waitmdl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Shared data model: wait categories, attribute-qualified items, itemsets,
//! hourly transactions and the transaction database.

use std::fmt;

use chrono::NaiveDateTime;
use thiserror::Error;

/// Upper bound on the number of attributes (sites) in one database. Covers
/// track covered attributes in a `u64` mask.
pub const MAX_ATTRIBUTES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("attribute list is empty")]
    EmptyAttributes,
    #[error("duplicate attribute {0:?}")]
    DuplicateAttribute(String),
    #[error("too many attributes: {0} (at most {MAX_ATTRIBUTES})")]
    TooManyAttributes(usize),
    #[error("row {row} has {found} items, expected {expected}")]
    ArityMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("itemset holds two items for attribute #{0}")]
    ConflictingItems(u16),
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("malformed item {0:?}, expected attr:category")]
    MalformedItem(String),
    #[error("invalid category index {0:?}, expected 1..=4")]
    InvalidCategory(String),
}

/// Discretized wait time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    NoWaiting = 1,
    SlightDelay = 2,
    Delay = 3,
    HeavyDelay = 4,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::NoWaiting,
        Category::SlightDelay,
        Category::Delay,
        Category::HeavyDelay,
    ];

    /// 1-based index.
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Option<Category> {
        match index {
            1 => Some(Category::NoWaiting),
            2 => Some(Category::SlightDelay),
            3 => Some(Category::Delay),
            4 => Some(Category::HeavyDelay),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::NoWaiting => "no waiting",
            Category::SlightDelay => "slight delay",
            Category::Delay => "delay",
            Category::HeavyDelay => "heavy delay",
        }
    }

    pub fn parse(s: &str) -> Result<Category, ModelError> {
        s.trim()
            .parse::<u8>()
            .ok()
            .and_then(Category::from_index)
            .ok_or_else(|| ModelError::InvalidCategory(s.to_string()))
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// An attribute-qualified item: the category observed at one site.
///
/// `LQ:2` and `RB:2` are different items. Items order by attribute position,
/// then category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item {
    pub attr: u16,
    pub cat: Category,
}

impl Item {
    pub fn new(attr: usize, cat: Category) -> Item {
        Item {
            attr: attr as u16,
            cat,
        }
    }

    pub fn label(&self, attributes: &[String]) -> String {
        match attributes.get(self.attr as usize) {
            Some(name) => format!("{}:{}", name, self.cat),
            None => format!("#{}:{}", self.attr, self.cat),
        }
    }

    /// Parses `attr:cat` against an attribute list.
    pub fn parse(s: &str, attributes: &[String]) -> Result<Item, ModelError> {
        let (name, cat) = s
            .trim()
            .rsplit_once(':')
            .ok_or_else(|| ModelError::MalformedItem(s.to_string()))?;
        let attr = attributes
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| ModelError::UnknownAttribute(name.to_string()))?;
        Ok(Item::new(attr, Category::parse(cat)?))
    }
}

/// A sorted set of items holding at most one item per attribute.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemSet(Vec<Item>);

impl ItemSet {
    pub fn new(items: impl IntoIterator<Item = Item>) -> Result<ItemSet, ModelError> {
        let mut items: Vec<Item> = items.into_iter().collect();
        items.sort_unstable();
        if let Some(w) = items.windows(2).find(|w| w[0].attr == w[1].attr) {
            return Err(ModelError::ConflictingItems(w[0].attr));
        }
        Ok(ItemSet(items))
    }

    pub fn singleton(item: Item) -> ItemSet {
        ItemSet(vec![item])
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bit `a` is set when the set holds an item for attribute `a`.
    pub fn attr_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, it| m | (1u64 << it.attr))
    }

    pub fn is_subset_of(&self, other: &ItemSet) -> bool {
        self.0.iter().all(|it| other.0.binary_search(it).is_ok())
    }

    /// `attr:cat,attr:cat`
    pub fn label(&self, attributes: &[String]) -> String {
        let labels: Vec<String> = self.0.iter().map(|it| it.label(attributes)).collect();
        labels.join(",")
    }

    pub fn parse(s: &str, attributes: &[String]) -> Result<ItemSet, ModelError> {
        if s.trim().is_empty() {
            return Ok(ItemSet::default());
        }
        let items = s
            .split(',')
            .map(|tok| Item::parse(tok, attributes))
            .collect::<Result<Vec<_>, _>>()?;
        ItemSet::new(items)
    }

    pub(crate) fn from_sorted_unchecked(items: Vec<Item>) -> ItemSet {
        debug_assert!(items.windows(2).all(|w| w[0].attr < w[1].attr));
        ItemSet(items)
    }
}

/// One hourly row of the database: one category per configured attribute,
/// positionally aligned with [`Database::attributes`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transaction {
    pub timestamp: NaiveDateTime,
    pub cats: Vec<Category>,
}

impl Transaction {
    pub fn new(timestamp: NaiveDateTime, cats: Vec<Category>) -> Transaction {
        Transaction { timestamp, cats }
    }

    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        self.cats
            .iter()
            .enumerate()
            .map(|(attr, &cat)| Item::new(attr, cat))
    }

    pub fn item_set(&self) -> ItemSet {
        ItemSet::from_sorted_unchecked(self.items().collect())
    }

    pub fn contains(&self, itemset: &ItemSet) -> bool {
        itemset
            .items()
            .iter()
            .all(|it| self.cats.get(it.attr as usize) == Some(&it.cat))
    }

    pub fn full_mask(&self) -> u64 {
        match self.cats.len() {
            64 => u64::MAX,
            n => (1u64 << n) - 1,
        }
    }
}

/// The database table: ordered attribute names and their transactions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    attributes: Vec<String>,
    transactions: Vec<Transaction>,
}

impl Database {
    pub fn new(
        attributes: Vec<String>,
        transactions: Vec<Transaction>,
    ) -> Result<Database, ModelError> {
        validate_attributes(&attributes)?;
        for (row, txn) in transactions.iter().enumerate() {
            if txn.cats.len() != attributes.len() {
                return Err(ModelError::ArityMismatch {
                    row,
                    expected: attributes.len(),
                    found: txn.cats.len(),
                });
            }
        }
        Ok(Database {
            attributes,
            transactions,
        })
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn into_parts(self) -> (Vec<String>, Vec<Transaction>) {
        (self.attributes, self.transactions)
    }
}

pub(crate) fn validate_attributes(attributes: &[String]) -> Result<(), ModelError> {
    if attributes.is_empty() {
        return Err(ModelError::EmptyAttributes);
    }
    if attributes.len() > MAX_ATTRIBUTES {
        return Err(ModelError::TooManyAttributes(attributes.len()));
    }
    for (i, a) in attributes.iter().enumerate() {
        if attributes[..i].contains(a) {
            return Err(ModelError::DuplicateAttribute(a.clone()));
        }
    }
    Ok(())
}
