//! Instance representation, validation and derived statistics.
//!
//! Requests are active on the half-open interval `[start, end)`: a request
//! ending at `t` and one starting at `t` never occupy a bin together.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stable identifier of a request. Survives compression, reduction and lifting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestId(pub u32);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Non-negative integer resource amounts, one per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceVector(Vec<u64>);

impl ResourceVector {
    pub fn new(components: Vec<u64>) -> Self {
        Self(components)
    }

    pub fn zeros(dimension: usize) -> Self {
        Self(vec![0; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Component-wise `self <= other`.
    pub fn fits_within(&self, other: &ResourceVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl From<Vec<u64>> for ResourceVector {
    fn from(value: Vec<u64>) -> Self {
        Self(value)
    }
}

impl std::ops::Index<usize> for ResourceVector {
    type Output = u64;

    fn index(&self, index: usize) -> &u64 {
        &self.0[index]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Request {
    pub id: RequestId,
    pub demand: ResourceVector,
    pub start: u64,
    pub end: u64,
}

impl Request {
    pub fn new(id: u32, demand: Vec<u64>, start: u64, end: u64) -> Self {
        Self {
            id: RequestId(id),
            demand: ResourceVector::new(demand),
            start,
            end,
        }
    }

    /// Number of time instants the request occupies.
    pub fn span(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_active_at(&self, t: u64) -> bool {
        self.start <= t && t < self.end
    }

    /// Half-open intervals intersect iff each starts before the other ends.
    pub fn intersects(&self, other: &Request) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn type_key(&self) -> TypeKey {
        TypeKey {
            demand: self.demand.clone(),
            start: self.start,
            end: self.end,
        }
    }

    pub fn flavor_key(&self) -> FlavorKey {
        FlavorKey(self.demand.clone())
    }
}

/// Requests share a flavor iff their demand vectors are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlavorKey(pub ResourceVector);

/// Requests share a type iff they share flavor, start and end.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeKey {
    pub demand: ResourceVector,
    pub start: u64,
    pub end: u64,
}

/// A validated DVBP instance. Immutable once constructed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    capacity: ResourceVector,
    requests: Vec<Request>,
}

impl Instance {
    /// Validates with default options (zero-duration requests are rejected).
    pub fn new(capacity: Vec<u64>, requests: Vec<Request>) -> Result<Self, ValidationErrors> {
        let raw = RawInstance {
            capacity: capacity.into_iter().map(|c| c as i128).collect(),
            requests: requests.into_iter().map(RawRequest::from).collect(),
        };
        validate_instance(raw, ValidateOptions::default()).map(|v| v.instance)
    }

    /// Caller guarantees every invariant `validate_instance` checks.
    pub(crate) fn from_parts_unchecked(capacity: ResourceVector, requests: Vec<Request>) -> Self {
        debug_assert!(requests.iter().all(|r| r.start < r.end
            && r.demand.dimension() == capacity.dimension()
            && r.demand.fits_within(&capacity)));
        Self { capacity, requests }
    }

    pub fn capacity(&self) -> &ResourceVector {
        &self.capacity
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn dimension(&self) -> usize {
        self.capacity.dimension()
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Latest end time, 0 for an empty instance.
    pub fn horizon(&self) -> u64 {
        self.requests.iter().map(|r| r.end).max().unwrap_or(0)
    }

    pub fn ids(&self) -> impl Iterator<Item = RequestId> + '_ {
        self.requests.iter().map(|r| r.id)
    }

    /// Map from request id to its position in `requests()`.
    pub fn id_index(&self) -> HashMap<RequestId, usize> {
        self.requests
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id, i))
            .collect()
    }

    /// Same capacity, only the requests for which `keep` holds.
    pub fn retain(&self, mut keep: impl FnMut(&Request) -> bool) -> Instance {
        let requests = self.requests.iter().filter(|r| keep(r)).cloned().collect();
        Instance::from_parts_unchecked(self.capacity.clone(), requests)
    }

    /// Sub-instance containing exactly the given ids.
    pub fn restrict_to(&self, ids: &HashSet<RequestId>) -> Instance {
        self.retain(|r| ids.contains(&r.id))
    }

    /// Same capacity and ids with the requests' coordinates replaced.
    pub(crate) fn with_requests(&self, requests: Vec<Request>) -> Instance {
        Instance::from_parts_unchecked(self.capacity.clone(), requests)
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            capacity: self
                .capacity
                .components()
                .iter()
                .map(|&c| c as i128)
                .collect(),
            requests: self
                .requests
                .iter()
                .cloned()
                .map(RawRequest::from)
                .collect(),
        }
    }
}

/// Unvalidated input, as produced by parsers.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RawInstance {
    pub capacity: Vec<i128>,
    pub requests: Vec<RawRequest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u32>,
    pub demand: Vec<i128>,
    pub start: i128,
    pub end: i128,
}

impl From<Request> for RawRequest {
    fn from(r: Request) -> Self {
        Self {
            id: Some(r.id.0),
            demand: r.demand.components().iter().map(|&c| c as i128).collect(),
            start: r.start as i128,
            end: r.end as i128,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Remove requests with `start == end` instead of rejecting them.
    pub drop_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validated {
    pub instance: Instance,
    /// Zero-duration requests removed under `drop_empty`.
    pub dropped_empty: usize,
}

/// Positions are 0-based indices into the raw request list; components and
/// dimensions in messages are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("capacity must have at least one component")]
    NoDimensions,
    #[error("capacity component {component} is {value}; capacities must be positive")]
    NonPositiveCapacity { component: usize, value: i128 },
    #[error("request #{position}: expected {expected} demand components, found {found}")]
    DimensionMismatch {
        position: usize,
        expected: usize,
        found: usize,
    },
    #[error("request #{position}: negative value {value} in {field}")]
    Negative {
        position: usize,
        field: &'static str,
        value: i128,
    },
    #[error("request #{position}: value {value} in {field} is out of range")]
    OutOfRange {
        position: usize,
        field: &'static str,
        value: i128,
    },
    #[error("request #{position}: demand exceeds capacity in component {component} (request cannot fit any bin)")]
    ExceedsCapacity { position: usize, component: usize },
    #[error("request #{position}: start {start} is not before end {end}")]
    EmptyInterval {
        position: usize,
        start: i128,
        end: i128,
    },
    #[error("duplicate request id {id}")]
    DuplicateId { id: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Checks every instance invariant and collects all violations. Requests
/// without an id get their 1-based position in the raw list.
pub fn validate_instance(
    raw: RawInstance,
    options: ValidateOptions,
) -> Result<Validated, ValidationErrors> {
    let mut errors = Vec::new();
    let d = raw.capacity.len();
    if d == 0 {
        errors.push(ValidationError::NoDimensions);
    }
    let mut capacity = Vec::with_capacity(d);
    for (j, &c) in raw.capacity.iter().enumerate() {
        if c <= 0 {
            errors.push(ValidationError::NonPositiveCapacity {
                component: j + 1,
                value: c,
            });
        } else if c > u64::MAX as i128 {
            errors.push(ValidationError::OutOfRange {
                position: 0,
                field: "capacity",
                value: c,
            });
        }
        capacity.push(c.clamp(0, u64::MAX as i128) as u64);
    }

    let mut requests = Vec::with_capacity(raw.requests.len());
    let mut dropped_empty = 0;
    let mut seen = HashSet::with_capacity(raw.requests.len());
    for (position, r) in raw.requests.into_iter().enumerate() {
        let before = errors.len();
        if r.demand.len() != d {
            errors.push(ValidationError::DimensionMismatch {
                position,
                expected: d,
                found: r.demand.len(),
            });
        }
        for (field, value) in [("start", r.start), ("end", r.end)] {
            if value < 0 {
                errors.push(ValidationError::Negative {
                    position,
                    field,
                    value,
                });
            } else if value > u64::MAX as i128 {
                errors.push(ValidationError::OutOfRange {
                    position,
                    field,
                    value,
                });
            }
        }
        for (j, &a) in r.demand.iter().enumerate() {
            if a < 0 {
                errors.push(ValidationError::Negative {
                    position,
                    field: "demand",
                    value: a,
                });
            } else if j < d && a > raw.capacity[j] {
                errors.push(ValidationError::ExceedsCapacity {
                    position,
                    component: j + 1,
                });
            }
        }
        let id = match r.id {
            Some(id) => id,
            None => match u32::try_from(position + 1) {
                Ok(id) => id,
                Err(_) => {
                    errors.push(ValidationError::OutOfRange {
                        position,
                        field: "id",
                        value: position as i128 + 1,
                    });
                    continue;
                }
            },
        };
        if !seen.insert(id) {
            errors.push(ValidationError::DuplicateId { id });
        }
        if errors.len() > before {
            continue;
        }
        match r.start.cmp(&r.end) {
            Ordering::Less => {}
            Ordering::Equal if options.drop_empty => {
                dropped_empty += 1;
                continue;
            }
            _ => {
                errors.push(ValidationError::EmptyInterval {
                    position,
                    start: r.start,
                    end: r.end,
                });
                continue;
            }
        }
        requests.push(Request {
            id: RequestId(id),
            demand: ResourceVector::new(r.demand.iter().map(|&a| a as u64).collect()),
            start: r.start as u64,
            end: r.end as u64,
        });
    }

    if errors.is_empty() {
        Ok(Validated {
            instance: Instance::from_parts_unchecked(ResourceVector::new(capacity), requests),
            dropped_empty,
        })
    } else {
        Err(ValidationErrors(errors))
    }
}

/// Start or end of a request interval. Ends sort before starts at equal
/// coordinates, which is what half-open intervals need.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum EventKind {
    End,
    Start,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Event {
    pub time: u64,
    pub kind: EventKind,
    pub index: usize,
}

/// All 2n events sorted by (time, kind, request position).
pub(crate) fn sorted_events(requests: &[Request]) -> Vec<Event> {
    let mut events = Vec::with_capacity(requests.len() * 2);
    for (index, r) in requests.iter().enumerate() {
        events.push(Event {
            time: r.start,
            kind: EventKind::Start,
            index,
        });
        events.push(Event {
            time: r.end,
            kind: EventKind::End,
            index,
        });
    }
    events.sort_unstable();
    events
}

/// Number of active requests from `time` until the next step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileStep {
    pub time: u64,
    pub active: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceStats {
    pub n: usize,
    pub d: usize,
    /// Maximum end time.
    pub horizon: u64,
    /// Maximum number of simultaneously active requests.
    pub height: usize,
    pub flavors: usize,
    pub types: usize,
    /// Step function of |S_t|, one step per distinct event coordinate.
    pub active_profile: Vec<ProfileStep>,
}

pub fn compute_stats(instance: &Instance) -> InstanceStats {
    let requests = instance.requests();
    let events = sorted_events(requests);
    let mut active = 0usize;
    let mut height = 0usize;
    let mut profile: Vec<ProfileStep> = Vec::new();
    let mut i = 0;
    while i < events.len() {
        let time = events[i].time;
        while i < events.len() && events[i].time == time {
            match events[i].kind {
                EventKind::Start => active += 1,
                EventKind::End => active -= 1,
            }
            i += 1;
        }
        height = height.max(active);
        profile.push(ProfileStep { time, active });
    }

    let flavors = requests
        .iter()
        .map(|r| &r.demand)
        .collect::<HashSet<_>>()
        .len();
    let types = requests
        .iter()
        .map(|r| (&r.demand, r.start, r.end))
        .collect::<HashSet<_>>()
        .len();

    InstanceStats {
        n: requests.len(),
        d: instance.dimension(),
        horizon: instance.horizon(),
        height,
        flavors,
        types,
        active_profile: profile,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeEntry {
    pub key: TypeKey,
    /// Ids of the requests of this type, ascending.
    pub members: Vec<RequestId>,
}

impl TypeEntry {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

/// Requests grouped by type, entries sorted by `TypeKey`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeTable {
    pub entries: Vec<TypeEntry>,
}

impl TypeTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(TypeEntry::multiplicity).sum()
    }

    /// Expands every entry back into individual requests.
    pub fn ungroup(&self) -> Vec<Request> {
        self.entries
            .iter()
            .flat_map(|e| {
                e.members.iter().map(move |&id| Request {
                    id,
                    demand: e.key.demand.clone(),
                    start: e.key.start,
                    end: e.key.end,
                })
            })
            .collect()
    }
}

pub fn group_types(instance: &Instance) -> TypeTable {
    let requests = instance.requests();
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        let (ra, rb) = (&requests[a], &requests[b]);
        (&ra.demand, ra.start, ra.end, ra.id).cmp(&(&rb.demand, rb.start, rb.end, rb.id))
    });

    let mut entries: Vec<TypeEntry> = Vec::new();
    for idx in order {
        let r = &requests[idx];
        match entries.last_mut() {
            Some(last)
                if last.key.start == r.start
                    && last.key.end == r.end
                    && last.key.demand == r.demand =>
            {
                last.members.push(r.id)
            }
            _ => entries.push(TypeEntry {
                key: r.type_key(),
                members: vec![r.id],
            }),
        }
    }
    TypeTable { entries }
}
