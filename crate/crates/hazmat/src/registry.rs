//! Offline code database: one folder per code field, one `.txt` file per
//! code, loaded into an in-memory map at startup. Resolution of a card into
//! a human-readable intervention sheet happens entirely offline.
//!
//! Directory layout:
//!
//! ```text
//! <root>/S_id/<8-hex>.txt
//! <root>/Comp_id/<8-hex>.txt
//! <root>/Exm_id/<4-hex>.txt
//! <root>/Et_id/<4-hex>.txt
//! ```

use crate::card::HazmatCard;
use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldKind {
    SId,
    CompId,
    ExmId,
    EtId,
}

impl FieldKind {
    pub const ALL: [FieldKind; 4] =
        [FieldKind::SId, FieldKind::CompId, FieldKind::ExmId, FieldKind::EtId];

    pub fn folder(self) -> &'static str {
        match self {
            FieldKind::SId => "S_id",
            FieldKind::CompId => "Comp_id",
            FieldKind::ExmId => "Exm_id",
            FieldKind::EtId => "Et_id",
        }
    }

    pub fn code_width(self) -> usize {
        match self {
            FieldKind::SId | FieldKind::CompId => 8,
            FieldKind::ExmId | FieldKind::EtId => 4,
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.folder())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryWarning {
    MalformedCode { kind: FieldKind, stem: String },
    UnknownFolder(String),
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("registry root missing: {0}")]
    MissingRoot(PathBuf),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Default)]
pub struct Registry {
    entries: HashMap<(FieldKind, String), String>,
    pub warnings: Vec<RegistryWarning>,
}

impl Registry {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, kind: FieldKind, code: impl Into<String>, info: impl Into<String>) {
        self.entries.insert((kind, code.into()), info.into());
    }

    /// Exact-match lookup; `None` means not found.
    pub fn lookup(&self, kind: FieldKind, code: &str) -> Option<&str> {
        self.entries.get(&(kind, code.to_string())).map(String::as_str)
    }

    /// Resolves every code field of the card. Codes that miss the registry
    /// land in `unresolved_codes`; nothing is silently dropped.
    pub fn resolve_card(&self, card: &HazmatCard) -> InterventionSheet {
        let mut sheet = InterventionSheet {
            substance_name: String::new(),
            component_names: Vec::new(),
            extinguishers: Vec::new(),
            labels: Vec::new(),
            toxicity: card.is_toxic(),
            kemler_no: card.kemler_no.clone(),
            onu_no: card.onu_no.clone(),
            ign_p: card.ign_p.clone(),
            sig_temp: card.sig_temp.clone(),
            b_pnt: card.b_pnt.clone(),
            m_pnt: card.m_pnt.clone(),
            s_dens: card.s_dens.clone(),
            operator: (card.op_name.clone(), card.op_phone.clone()),
            truck: (card.t_id, card.t_rn.clone()),
            unresolved_codes: Vec::new(),
        };
        if !card.s_id.is_empty() {
            match self.lookup(FieldKind::SId, &card.s_id) {
                Some(name) => sheet.substance_name = name.to_string(),
                None => sheet.unresolved_codes.push((FieldKind::SId, card.s_id.clone())),
            }
        }
        let mut resolve_list = |kind: FieldKind, codes: &[String], out: &mut Vec<String>| {
            for code in codes {
                match self.lookup(kind, code) {
                    Some(name) => out.push(name.to_string()),
                    None => sheet_push(&mut sheet.unresolved_codes, kind, code),
                }
            }
        };
        let mut components = Vec::new();
        let mut extinguishers = Vec::new();
        let mut labels = Vec::new();
        resolve_list(FieldKind::CompId, &card.comp_ids, &mut components);
        resolve_list(FieldKind::ExmId, &card.exm_ids, &mut extinguishers);
        resolve_list(FieldKind::EtId, &card.et_ids, &mut labels);
        sheet.component_names = components;
        sheet.extinguishers = extinguishers;
        sheet.labels = labels;
        sheet
    }
}

fn sheet_push(unresolved: &mut Vec<(FieldKind, String)>, kind: FieldKind, code: &str) {
    unresolved.push((kind, code.to_string()));
}

fn is_hex_code(s: &str, width: usize) -> bool {
    s.len() == width && s.bytes().all(|b| b.is_ascii_digit() || (b'A'..=b'F').contains(&b))
}

/// Loads the folder-per-field registry from disk. Missing field folders are
/// treated as empty; unknown subfolders and malformed code stems are
/// recorded as warnings and skipped.
pub fn load_registry(root: &Path) -> Result<Registry, RegistryError> {
    if !root.is_dir() {
        return Err(RegistryError::MissingRoot(root.to_path_buf()));
    }
    let mut registry = Registry::default();
    let known: Vec<&str> = FieldKind::ALL.iter().map(|k| k.folder()).collect();
    let mut top: Vec<_> = fs::read_dir(root)?.collect::<Result<_, _>>()?;
    top.sort_by_key(|e| e.file_name());
    for entry in &top {
        if entry.file_type()?.is_dir() {
            let name = entry.file_name().to_string_lossy().to_string();
            if !known.contains(&name.as_str()) {
                registry.warnings.push(RegistryWarning::UnknownFolder(name));
            }
        }
    }
    for kind in FieldKind::ALL {
        let dir = root.join(kind.folder());
        if !dir.is_dir() {
            continue;
        }
        let mut files: Vec<_> = fs::read_dir(&dir)?.collect::<Result<_, _>>()?;
        files.sort_by_key(|e| e.file_name());
        for file in files {
            let path = file.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let stem = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
            if !is_hex_code(&stem, kind.code_width()) {
                registry.warnings.push(RegistryWarning::MalformedCode { kind, stem });
                continue;
            }
            let content = fs::read_to_string(&path)?;
            let info = content.trim_end_matches(['\n', '\r']).to_string();
            registry.insert(kind, stem, info);
        }
    }
    Ok(registry)
}

/// Offline resolution of a card: substance names, extinguishers, labels and
/// verbatim scalar fields, for display at the intervention place.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionSheet {
    pub substance_name: String,
    pub component_names: Vec<String>,
    pub extinguishers: Vec<String>,
    pub labels: Vec<String>,
    pub toxicity: bool,
    pub kemler_no: String,
    pub onu_no: String,
    pub ign_p: String,
    pub sig_temp: String,
    pub b_pnt: String,
    pub m_pnt: String,
    pub s_dens: String,
    pub operator: (String, String),
    pub truck: (u64, String),
    pub unresolved_codes: Vec<(FieldKind, String)>,
}

impl InterventionSheet {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("== INTERVENTION SHEET ==\n");
        out.push_str(&format!(
            "substance: {}\n",
            if self.substance_name.is_empty() { "(unknown)" } else { &self.substance_name }
        ));
        out.push_str(&format!(
            "toxicity: {}\n",
            if self.toxicity { "TOXIC" } else { "non-toxic" }
        ));
        out.push_str(&format!("kemler: {}  onu: {}\n", self.kemler_no, self.onu_no));
        out.push_str(&format!(
            "ignition point: {} C  self-ignition: {} C\n",
            self.ign_p, self.sig_temp
        ));
        out.push_str(&format!(
            "boiling point: {} C  melting point: {} C  density: {} kg/m3\n",
            self.b_pnt, self.m_pnt, self.s_dens
        ));
        out.push_str(&format!("components: {}\n", self.component_names.join("; ")));
        out.push_str(&format!("extinguishers: {}\n", self.extinguishers.join("; ")));
        out.push_str(&format!("labels: {}\n", self.labels.join("; ")));
        out.push_str(&format!("operator: {} {}\n", self.operator.0, self.operator.1));
        out.push_str(&format!("truck: {} {}\n", self.truck.0, self.truck.1));
        if !self.unresolved_codes.is_empty() {
            out.push_str("UNRESOLVED:\n");
            for (kind, code) in &self.unresolved_codes {
                out.push_str(&format!("  {kind} {code}\n"));
            }
        }
        out
    }
}
