//! Residual processing: globally re-sorted long-tail values are templatized
//! just in time into static fragments plus classified numeric placeholders,
//! feeding homogeneous per-class value streams.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::codec;
use crate::error::{Error, Result};
use crate::wire::{Reader, Writer};

/// Numeric runs shorter than this stay inside the static text. Single digits
/// embedded in otherwise stable identifiers are not worth a value stream and
/// keeping them static lets such values dedupe as whole templates.
const MIN_NUMERIC_RUN: usize = 2;
/// Runs longer than this may overflow 64-bit arithmetic and are kept as
/// static text.
const MAX_NUMERIC_RUN: usize = 19;

/// Classification of one numeric run; equal keys share one value stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NumericClass {
    /// Length of the numeric string (values re-render zero-padded to this).
    pub digits: u8,
    /// First digit character.
    pub lead: u8,
}

impl NumericClass {
    pub fn leading_zero(&self) -> bool {
        self.lead == b'0' && self.digits > 1
    }

    /// Canonical stream name, e.g. `L4D0Z` for four digits starting with a
    /// leading zero.
    pub fn stream_name(&self) -> String {
        format!(
            "L{}D{}{}",
            self.digits,
            self.lead as char,
            if self.leading_zero() { "Z" } else { "" }
        )
    }
}

/// Classify a nonempty decimal digit run by its intrinsic features.
pub fn classify_numeric(run: &[u8]) -> NumericClass {
    debug_assert!(!run.is_empty() && run.iter().all(u8::is_ascii_digit));
    NumericClass {
        digits: run.len().min(255) as u8,
        lead: run[0],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TemplatePart {
    Static(Vec<u8>),
    Num(NumericClass),
}

/// A residual template: static fragments interleaved with numeric
/// placeholders. Splicing the stream values back into the placeholders in
/// order reproduces the original residual string exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Template {
    pub parts: Vec<TemplatePart>,
}

impl Template {
    pub fn placeholder_count(&self) -> usize {
        self.parts
            .iter()
            .filter(|p| matches!(p, TemplatePart::Num(_)))
            .count()
    }

    pub fn is_atomic(&self) -> bool {
        self.placeholder_count() == 0
    }

    /// Rebuild the original bytes, pulling one value per placeholder.
    pub fn render(
        &self,
        mut next: impl FnMut(NumericClass) -> Result<i64>,
        out: &mut Vec<u8>,
    ) -> Result<()> {
        use std::io::Write;
        for part in &self.parts {
            match part {
                TemplatePart::Static(bytes) => out.extend_from_slice(bytes),
                TemplatePart::Num(class) => {
                    let value = next(*class)?;
                    write!(out, "{value:0width$}", width = class.digits as usize)
                        .expect("writing to Vec cannot fail");
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for part in &self.parts {
            match part {
                TemplatePart::Static(bytes) => write!(f, "{}", String::from_utf8_lossy(bytes))?,
                TemplatePart::Num(class) => write!(f, "<{}>", class.stream_name())?,
            }
        }
        Ok(())
    }
}

/// Decompose one residual value into a template plus its numeric values.
/// Maximal decimal-digit runs become placeholders when they are long enough
/// and fit in an `i64`; everything else stays static text.
pub fn templatize(value: &[u8]) -> (Template, Vec<(NumericClass, i64)>) {
    let mut parts = Vec::new();
    let mut values = Vec::new();
    let mut static_run: Vec<u8> = Vec::new();
    let mut i = 0usize;
    while i < value.len() {
        if value[i].is_ascii_digit() {
            let start = i;
            while i < value.len() && value[i].is_ascii_digit() {
                i += 1;
            }
            let run = &value[start..i];
            let parsed = if (MIN_NUMERIC_RUN..=MAX_NUMERIC_RUN).contains(&run.len()) {
                std::str::from_utf8(run)
                    .ok()
                    .and_then(|s| s.parse::<i64>().ok())
            } else {
                None
            };
            match parsed {
                Some(v) => {
                    if !static_run.is_empty() {
                        parts.push(TemplatePart::Static(std::mem::take(&mut static_run)));
                    }
                    let class = classify_numeric(run);
                    parts.push(TemplatePart::Num(class));
                    values.push((class, v));
                }
                None => static_run.extend_from_slice(run),
            }
        } else {
            static_run.push(value[i]);
            i += 1;
        }
    }
    if !static_run.is_empty() {
        parts.push(TemplatePart::Static(static_run));
    }
    (Template { parts }, values)
}

/// Deduplicating template dictionary; IDs are dense in first-use order.
#[derive(Debug, Default)]
pub struct TemplateDict {
    list: Vec<Template>,
    index: HashMap<Template, u64>,
}

impl TemplateDict {
    pub fn intern(&mut self, template: Template) -> u64 {
        if let Some(&id) = self.index.get(&template) {
            return id;
        }
        let id = self.list.len() as u64;
        self.index.insert(template.clone(), id);
        self.list.push(template);
        id
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Template> {
        self.list.get(id as usize)
    }

    pub fn templates(&self) -> &[Template] {
        &self.list
    }
}

/// One residual value awaiting stage 3, addressed by line and original
/// varList position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidualEntry<'a> {
    pub lid: u64,
    pub position: usize,
    pub value: &'a [u8],
}

/// Stable global re-sort by (lid, position), restoring input order so
/// cross-group sequences land adjacently in their value streams.
pub fn global_sort(entries: &mut [ResidualEntry]) {
    entries.sort_by_key(|e| (e.lid, e.position));
}

/// Accumulated stage-3 output: the ResVar template-ID stream and the
/// per-class numeric value streams, in emission order.
#[derive(Debug, Default)]
pub struct ResidualStreams {
    pub dict: TemplateDict,
    pub template_ids: Vec<u64>,
    pub numeric: BTreeMap<NumericClass, Vec<i64>>,
}

impl ResidualStreams {
    /// Templatize one residual value in sorted order.
    pub fn push(&mut self, value: &[u8]) {
        let (template, values) = templatize(value);
        let id = self.dict.intern(template);
        self.template_ids.push(id);
        for (class, v) in values {
            self.numeric.entry(class).or_default().push(v);
        }
    }

    pub fn serialize(&self, out: &mut Writer) {
        out.varint(self.dict.len() as u64);
        for template in self.dict.templates() {
            out.varint(template.parts.len() as u64);
            for part in &template.parts {
                match part {
                    TemplatePart::Static(bytes) => {
                        out.byte(0);
                        out.blob(bytes);
                    }
                    TemplatePart::Num(class) => {
                        out.byte(1);
                        out.byte(class.digits);
                        out.byte(class.lead);
                    }
                }
            }
        }
        out.varint(self.template_ids.len() as u64);
        out.raw(&codec::encode_unsigned_stream(&self.template_ids));
        out.varint(self.numeric.len() as u64);
        for (class, values) in &self.numeric {
            out.byte(class.digits);
            out.byte(class.lead);
            out.varint(values.len() as u64);
            out.blob(&codec::encode_stream(values));
        }
    }
}

/// Decoded stage-3 payload.
#[derive(Debug)]
pub struct DecodedResiduals {
    pub templates: Vec<Template>,
    pub template_ids: Vec<u64>,
    pub numeric: HashMap<NumericClass, Vec<i64>>,
}

impl DecodedResiduals {
    pub fn parse(r: &mut Reader) -> Result<Self> {
        let ntemplates = r.usize()?;
        let mut templates = Vec::with_capacity(ntemplates);
        for _ in 0..ntemplates {
            let nparts = r.usize()?;
            let mut parts = Vec::with_capacity(nparts);
            for _ in 0..nparts {
                match r.byte()? {
                    0 => parts.push(TemplatePart::Static(r.blob()?)),
                    1 => {
                        let digits = r.byte()?;
                        let lead = r.byte()?;
                        if digits == 0 || !lead.is_ascii_digit() {
                            return Err(Error::corrupt("bad numeric class"));
                        }
                        parts.push(TemplatePart::Num(NumericClass { digits, lead }));
                    }
                    b => return Err(Error::corrupt(format!("bad template part tag {b}"))),
                }
            }
            templates.push(Template { parts });
        }
        let nids = r.usize()?;
        let mut template_ids = Vec::with_capacity(nids);
        for _ in 0..nids {
            let id = r.varint()?;
            if id >= ntemplates as u64 {
                return Err(Error::corrupt(format!("template ID {id} out of range")));
            }
            template_ids.push(id);
        }
        let nstreams = r.usize()?;
        let mut numeric = HashMap::with_capacity(nstreams);
        for _ in 0..nstreams {
            let digits = r.byte()?;
            let lead = r.byte()?;
            let count = r.usize()?;
            let bytes = r.blob()?;
            let values = codec::decode_stream(&bytes, count).map_err(|e| {
                Error::corrupt(format!("numeric stream L{digits}D{}: {e}", lead as char))
            })?;
            let class = NumericClass { digits, lead };
            if numeric.insert(class, values).is_some() {
                return Err(Error::corrupt(format!(
                    "duplicate numeric stream {}",
                    class.stream_name()
                )));
            }
        }
        Ok(Self {
            templates,
            template_ids,
            numeric,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn render_with(template: &Template, values: &[(NumericClass, i64)]) -> Vec<u8> {
        let mut iter = values.iter();
        let mut out = Vec::new();
        template
            .render(
                |class| {
                    let (c, v) = iter.next().expect("value per placeholder");
                    assert_eq!(*c, class);
                    Ok(*v)
                },
                &mut out,
            )
            .unwrap();
        out
    }

    #[test]
    fn composite_value_splits_into_classified_parts() {
        let (template, values) = templatize(b"audit(1119799950.864:693295):");
        assert_eq!(template.placeholder_count(), 3);
        assert_eq!(
            values
                .iter()
                .map(|(c, v)| (c.stream_name(), *v))
                .collect::<Vec<_>>(),
            vec![
                ("L10D1".to_string(), 1119799950),
                ("L3D8".to_string(), 864),
                ("L6D6".to_string(), 693295),
            ]
        );
        // The decimal point and colon are static fragments.
        assert_eq!(
            render_with(&template, &values),
            b"audit(1119799950.864:693295):"
        );
    }

    #[test]
    fn host_name_with_stray_digit_stays_atomic() {
        let (template, values) = templatize(b"rhost=srv2.alfahost.nl");
        assert!(template.is_atomic());
        assert!(values.is_empty());
        assert_eq!(render_with(&template, &values), b"rhost=srv2.alfahost.nl");
    }

    #[test]
    fn bare_number_is_single_placeholder() {
        let (template, values) = templatize(b"5001");
        assert_eq!(template.parts.len(), 1);
        assert_eq!(template.placeholder_count(), 1);
        assert_eq!(
            values,
            vec![(
                NumericClass {
                    digits: 4,
                    lead: b'5'
                },
                5001
            )]
        );
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_numeric(b"693295"),
            NumericClass {
                digits: 6,
                lead: b'6'
            }
        );
        let c = classify_numeric(b"0042");
        assert_eq!(
            c,
            NumericClass {
                digits: 4,
                lead: b'0'
            }
        );
        assert!(c.leading_zero());
        assert_eq!(c.stream_name(), "L4D0Z");
        // Same class means same stream means delta-friendly.
        assert_eq!(classify_numeric(b"5001"), classify_numeric(b"5002"));
        assert!(!classify_numeric(b"7777").leading_zero());
    }

    #[test]
    fn leading_zeros_rerender_padded() {
        let (template, values) = templatize(b"item-0042-end");
        assert_eq!(render_with(&template, &values), b"item-0042-end");
    }

    #[test]
    fn twenty_digit_runs_stay_static() {
        let v = b"99999999999999999999"; // 20 digits, would overflow
        let (template, values) = templatize(v);
        assert!(template.is_atomic());
        assert!(values.is_empty());
        // 19 digits beyond i64::MAX also stays static.
        let (template, values) = templatize(b"9999999999999999999");
        assert!(template.is_atomic());
        assert_eq!(render_with(&template, &values), b"9999999999999999999");
        // 19 digits within range is extracted.
        let (template, _) = templatize(b"1223372036854775807");
        assert_eq!(template.placeholder_count(), 1);
    }

    #[test]
    fn dictionary_dedupes_identical_templates() {
        let mut streams = ResidualStreams::default();
        streams.push(b"5001");
        streams.push(b"5001");
        streams.push(b"5002");
        streams.push(b"rhost=srv2.alfahost.nl");
        assert_eq!(streams.dict.len(), 2);
        assert_eq!(streams.template_ids, vec![0, 0, 0, 1]);
        let class = NumericClass {
            digits: 4,
            lead: b'5',
        };
        assert_eq!(streams.numeric[&class], vec![5001, 5001, 5002]);
    }

    #[test]
    fn global_sort_restores_lid_order() {
        let v1 = b"5001";
        let v2 = b"5001";
        let v3 = b"5002";
        let mut entries = vec![
            ResidualEntry {
                lid: 7,
                position: 0,
                value: v3,
            },
            ResidualEntry {
                lid: 2,
                position: 0,
                value: v1,
            },
            ResidualEntry {
                lid: 3,
                position: 1,
                value: v2,
            },
            ResidualEntry {
                lid: 3,
                position: 0,
                value: v2,
            },
        ];
        global_sort(&mut entries);
        let keys: Vec<(u64, usize)> = entries.iter().map(|e| (e.lid, e.position)).collect();
        assert_eq!(keys, vec![(2, 0), (3, 0), (3, 1), (7, 0)]);
        // Already sorted input is untouched; reversed input is reversed.
        let mut sorted = entries.clone();
        global_sort(&mut sorted);
        assert_eq!(sorted, entries);
    }

    #[test]
    fn streams_serialize_roundtrip() {
        let mut streams = ResidualStreams::default();
        for v in [
            b"audit(1119799950.864:693295):".as_slice(),
            b"audit(1119799950.960:693296):",
            b"5001",
            b"0042",
            b"plain-text",
        ] {
            streams.push(v);
        }
        let mut w = Writer::new();
        streams.serialize(&mut w);
        let bytes = w.into_bytes();
        let mut r = Reader::new(&bytes, "residuals");
        let decoded = DecodedResiduals::parse(&mut r).unwrap();
        r.finish().unwrap();
        assert_eq!(decoded.templates.len(), streams.dict.len());
        assert_eq!(decoded.template_ids, streams.template_ids);
        for (class, values) in &streams.numeric {
            assert_eq!(&decoded.numeric[class], values);
        }
    }

    proptest! {
        #[test]
        fn templatize_roundtrips(value in proptest::collection::vec(any::<u8>(), 0..60)) {
            let (template, values) = templatize(&value);
            prop_assert_eq!(render_with(&template, &values), value);
        }

        #[test]
        fn templatize_roundtrips_numeric_heavy(
            parts in proptest::collection::vec(
                prop_oneof![
                    "[0-9]{1,25}".prop_map(String::into_bytes),
                    "[a-z:.()=-]{0,5}".prop_map(String::into_bytes),
                    Just(b"0".to_vec()),
                    Just(b"00".to_vec()),
                ],
                0..8
            )
        ) {
            let value: Vec<u8> = parts.concat();
            let (template, values) = templatize(&value);
            prop_assert_eq!(render_with(&template, &values), value);
        }
    }
}
