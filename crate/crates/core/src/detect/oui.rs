//! Vendor identification from the organizationally unique identifier.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::trace::Mac;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Camera,
    Assistant,
    Motion,
    Rf,
    Other,
}

impl Category {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "camera" => Category::Camera,
            "assistant" => Category::Assistant,
            "motion" => Category::Motion,
            "rf" => Category::Rf,
            "other" => Category::Other,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Camera => "camera",
            Category::Assistant => "assistant",
            Category::Motion => "motion",
            Category::Rf => "rf",
            Category::Other => "other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const UNKNOWN_VENDOR: &str = "unknown";

const BUILTIN: &str = include_str!("../../data/oui.csv");

/// Map from 24-bit prefix to vendor and device category.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OuiDatabase {
    entries: BTreeMap<u32, (String, Category)>,
}

fn parse_prefix(s: &str) -> Option<u32> {
    let parts: Vec<&str> = s.split([':', '-']).collect();
    if parts.len() != 3 || parts.iter().any(|p| p.len() != 2) {
        return None;
    }
    parts.iter().try_fold(0u32, |acc, p| {
        u8::from_str_radix(p, 16).ok().map(|b| (acc << 8) | b as u32)
    })
}

impl OuiDatabase {
    /// The synthetic database shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled OUI table is well formed")
    }

    /// Parses `xx:xx:xx,vendor,category` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut db = OuiDatabase::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(perr(format!("expected 3 fields, got {}", f.len())));
            }
            let prefix = parse_prefix(f[0].trim()).ok_or_else(|| perr(format!("bad OUI prefix {:?}", f[0])))?;
            let cat = Category::parse(f[2].trim()).ok_or_else(|| perr(format!("unknown category {:?}", f[2])))?;
            if db.entries.insert(prefix, (f[1].trim().to_string(), cat)).is_some() {
                return Err(perr(format!("duplicate prefix {}", f[0])));
            }
        }
        Ok(db)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Adds entries from an IEEE `oui.txt` listing (`XX-XX-XX   (hex)\tVendor`).
    /// Imported vendors get category `other`; existing prefixes are kept.
    pub fn import_ieee(&mut self, text: &str) -> usize {
        let mut added = 0;
        for line in text.lines() {
            let Some((prefix, rest)) = line.split_once("(hex)") else {
                continue;
            };
            let Some(p) = parse_prefix(prefix.trim()) else {
                continue;
            };
            let vendor = rest.trim();
            if vendor.is_empty() || self.entries.contains_key(&p) {
                continue;
            }
            self.entries.insert(p, (vendor.to_string(), Category::Other));
            added += 1;
        }
        added
    }

    pub fn insert(&mut self, prefix: u32, vendor: &str, category: Category) {
        self.entries.insert(prefix & 0xff_ffff, (vendor.to_string(), category));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, mac: Mac) -> Option<(&str, Category)> {
        self.entries.get(&mac.oui()).map(|(v, c)| (v.as_str(), *c))
    }
}

/// MACs whose prefix was not in the database, in first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscoveryLog {
    macs: Vec<Mac>,
}

impl DiscoveryLog {
    pub fn record(&mut self, mac: Mac) {
        if !self.macs.contains(&mac) {
            self.macs.push(mac);
        }
    }

    pub fn entries(&self) -> &[Mac] {
        &self.macs
    }
}

/// Vendor and category of `mac`; unknown prefixes are logged and reported as `("unknown", other)`.
pub fn oui_lookup(db: &OuiDatabase, mac: Mac, log: &mut DiscoveryLog) -> (String, Category) {
    match db.get(mac) {
        Some((v, c)) => (v.to_string(), c),
        None => {
            log.record(mac);
            (UNKNOWN_VENDOR.to_string(), Category::Other)
        }
    }
}

/// [`oui_lookup`] on a MAC in text form.
pub fn oui_lookup_str(db: &OuiDatabase, mac: &str, log: &mut DiscoveryLog) -> Result<(String, Category)> {
    Ok(oui_lookup(db, mac.parse()?, log))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_match() {
        let db = OuiDatabase::parse("aa:bb:cc,AcmeCam,camera\n").unwrap();
        let mut log = DiscoveryLog::default();
        let r = oui_lookup_str(&db, "aa:bb:cc:01:02:03", &mut log).unwrap();
        assert_eq!(r, ("AcmeCam".to_string(), Category::Camera));
        assert!(log.entries().is_empty());
    }

    #[test]
    fn unknown_prefix_is_logged() {
        let db = OuiDatabase::builtin();
        let mut log = DiscoveryLog::default();
        let r = oui_lookup_str(&db, "12:34:56:00:00:01", &mut log).unwrap();
        assert_eq!(r, ("unknown".to_string(), Category::Other));
        assert_eq!(log.entries().len(), 1);
    }

    #[test]
    fn malformed_mac_is_rejected() {
        let db = OuiDatabase::builtin();
        let mut log = DiscoveryLog::default();
        assert!(oui_lookup_str(&db, "aa:bb:cc:01:02", &mut log).is_err());
        assert!(oui_lookup_str(&db, "zz:bb:cc:01:02:03", &mut log).is_err());
    }

    #[test]
    fn duplicate_prefixes_are_rejected() {
        assert!(OuiDatabase::parse("aa:bb:cc,A,camera\naa:bb:cc,B,rf\n").is_err());
    }

    #[test]
    fn ieee_listing_import() {
        let mut db = OuiDatabase::builtin();
        let n = db.len();
        let added =
            db.import_ieee("00-00-0C   (hex)\t\tCisco Systems, Inc\n00000C     (base 16)\t\tCisco Systems, Inc\n");
        assert_eq!(added, 1);
        assert_eq!(db.len(), n + 1);
        assert_eq!(
            db.get(Mac::from_u64(0x00000c_000001)),
            Some(("Cisco Systems, Inc", Category::Other))
        );
    }
}
