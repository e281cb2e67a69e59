//! Aggregation of promoted objects into roadwork sites.
//!
//! The site book is the hierarchical roadwork dictionary: each site holds its
//! members ordered along the site axis (the vehicle heading when the site was
//! opened). Only the longitudinally first member, the head, keeps its full
//! contour; every other member keeps the last point of its contour. Sites are
//! finished once the vehicle has travelled more than [`FINISH_DISTANCE`]
//! without adding a member.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::detection::ObjectClass;
use crate::geometry::{convex_hull, distance_to_convex_hull, point_to_axis_distance, Pose2D, UtmAnchor, WorldPoint};
use crate::math;
use crate::tracking::TrackedObject;
use crate::{ObjectId, SiteId};

/// Arc length without new members after which a site is finished, meters.
pub const FINISH_DISTANCE: f64 = 50.0;

/// How far behind the vehicle an out-of-view member is still drawn, meters.
pub const GHOST_RETENTION: f64 = 15.0;

const CONTAINMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SeparationPolicy {
    /// Between cones and vertical panels.
    pub panel_panel_longitudinal: f64,
    pub barrier_barrier_longitudinal: f64,
    pub barrier_other_longitudinal: f64,
    pub lateral: f64,
}

impl Default for SeparationPolicy {
    fn default() -> Self {
        Self {
            panel_panel_longitudinal: 12.0,
            barrier_barrier_longitudinal: 2.0,
            barrier_other_longitudinal: 6.0,
            lateral: 1.5,
        }
    }
}

impl SeparationPolicy {
    pub fn validate(&self) -> Result<(), &'static str> {
        for (name, v) in [
            ("panel_panel_longitudinal", self.panel_panel_longitudinal),
            ("barrier_barrier_longitudinal", self.barrier_barrier_longitudinal),
            ("barrier_other_longitudinal", self.barrier_other_longitudinal),
            ("lateral", self.lateral),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(name);
            }
        }
        Ok(())
    }

    pub fn longitudinal_limit(&self, a: ObjectClass, b: ObjectClass) -> f64 {
        match (a.is_barrier(), b.is_barrier()) {
            (true, true) => self.barrier_barrier_longitudinal,
            (false, false) => self.panel_panel_longitudinal,
            _ => self.barrier_other_longitudinal,
        }
    }
}

/// Longitudinal and lateral components (absolute) of the vector between the
/// closest pair of points of `a` and `b`, in the frame of the unit heading
/// `dir`. `None` when either set is empty.
pub fn separation(a: &[WorldPoint], b: &[WorldPoint], dir: [f64; 2]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, [f64; 2])> = None;
    for p in a {
        for q in b {
            let d = [q.x - p.x, q.y - p.y];
            let dist2 = d[0] * d[0] + d[1] * d[1];
            if best.is_none_or(|(b, _)| dist2 < b) {
                best = Some((dist2, d));
            }
        }
    }
    best.map(|(_, d)| {
        let long = d[0] * dir[0] + d[1] * dir[1];
        let lat = -d[0] * dir[1] + d[1] * dir[0];
        (math::abs(long), math::abs(lat))
    })
}

/// Whether two objects are close enough to belong to the same site.
pub fn within_separation(
    a: (ObjectClass, &[WorldPoint]),
    b: (ObjectClass, &[WorldPoint]),
    dir: [f64; 2],
    policy: &SeparationPolicy,
) -> bool {
    match separation(a.1, b.1, dir) {
        Some((long, lat)) => long <= policy.longitudinal_limit(a.0, b.0) && lat <= policy.lateral,
        None => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteState {
    Active,
    Finished,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteMember {
    pub object_id: ObjectId,
    pub class: ObjectClass,
    /// Full contour for the head, last contour point for everyone else.
    pub stored_points: Vec<WorldPoint>,
    /// Position of the member's front along the site axis, meters.
    pub longitudinal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadworkSite {
    pub site_id: SiteId,
    pub members: Vec<SiteMember>,
    pub state: SiteState,
    /// Vehicle arc length when the latest member was added.
    pub arc_position: f64,
    pub ghosts: Vec<ObjectId>,
    /// Unit vector members are ordered along.
    pub axis: [f64; 2],
    pub first_seen: f64,
    pub last_seen: f64,
}

impl RoadworkSite {
    pub fn head(&self) -> Option<&SiteMember> {
        self.members.first()
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.members.iter().any(|m| m.object_id == id)
    }

    /// Stored points in site order: the head's contour, then one point per
    /// following member.
    pub fn stored_points(&self) -> Vec<WorldPoint> {
        self.members.iter().flat_map(|m| m.stored_points.iter().copied()).collect()
    }

    pub fn class_counts(&self) -> ClassCounts {
        let mut c = ClassCounts::default();
        for m in &self.members {
            c.add(m.class);
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SiteDimensions {
    pub length: f64,
    pub depth: f64,
}

/// Length is the largest distance from the first point to any other point;
/// depth the largest perpendicular distance from the axis through the first
/// point and that farthest point.
pub fn dimensions_of_points(points: &[WorldPoint]) -> SiteDimensions {
    let Some(first) = points.first() else {
        return SiteDimensions::default();
    };
    let mut far = *first;
    let mut length = 0.0;
    for p in points {
        let d = first.distance(p);
        if d > length {
            length = d;
            far = *p;
        }
    }
    let depth = points
        .iter()
        .filter_map(|p| point_to_axis_distance(p, first, &far).ok())
        .fold(0.0, f64::max);
    SiteDimensions { length, depth }
}

pub fn dimensions(site: &RoadworkSite) -> SiteDimensions {
    dimensions_of_points(&site.stored_points())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ClassCounts {
    pub barrier: u32,
    pub traffic_cone: u32,
    pub panel_pass_left: u32,
    pub panel_pass_right: u32,
}

impl ClassCounts {
    pub fn add(&mut self, class: ObjectClass) {
        match class {
            ObjectClass::Barrier => self.barrier += 1,
            ObjectClass::TrafficCone => self.traffic_cone += 1,
            ObjectClass::PanelPassLeft => self.panel_pass_left += 1,
            ObjectClass::PanelPassRight => self.panel_pass_right += 1,
        }
    }

    pub fn total(&self) -> u32 {
        self.barrier + self.traffic_cone + self.panel_pass_left + self.panel_pass_right
    }
}

/// Coordinate frame of a finished site's polygons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputFrame {
    Utm { zone: String },
    /// No anchor was configured; coordinates are local world.
    Local,
}

/// A finished site as written out.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteRecord {
    pub site_id: SiteId,
    pub frame: OutputFrame,
    /// Stored points in site order.
    pub raw_polygon: Vec<[f64; 2]>,
    pub hull_polygon: Vec<[f64; 2]>,
    pub dimensions: SiteDimensions,
    pub class_counts: ClassCounts,
    pub start_time: f64,
    pub end_time: f64,
}

/// Members that are out of view but up to [`GHOST_RETENTION`] behind the
/// vehicle. Stored points are not touched.
pub fn ghost_update(site: &RoadworkSite, visible_ids: &BTreeSet<ObjectId>, pose: &Pose2D) -> Vec<ObjectId> {
    let dir = pose.direction();
    site.members
        .iter()
        .filter(|m| !visible_ids.contains(&m.object_id))
        .filter(|m| {
            let along = m
                .stored_points
                .iter()
                .map(|p| (p.x - pose.x) * dir[0] + (p.y - pose.y) * dir[1])
                .fold(f64::NEG_INFINITY, f64::max);
            (-GHOST_RETENTION..0.0).contains(&along)
        })
        .map(|m| m.object_id)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
struct PromotedContour {
    class: ObjectClass,
    contour: Vec<WorldPoint>,
}

/// Result of [`SiteBook::finalize_check`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Finalization {
    pub records: Vec<SiteRecord>,
    /// Every site is finished: the caller resets its tracker.
    pub reset: bool,
}

/// The roadwork dictionary of active sites.
#[derive(Debug, Clone, Default)]
pub struct SiteBook {
    policy: SeparationPolicy,
    sites: Vec<RoadworkSite>,
    contours: BTreeMap<ObjectId, PromotedContour>,
    next_site_id: SiteId,
}

impl SiteBook {
    pub fn new(policy: SeparationPolicy) -> Self {
        Self {
            policy,
            sites: Vec::new(),
            contours: BTreeMap::new(),
            next_site_id: 1,
        }
    }

    pub fn policy(&self) -> &SeparationPolicy {
        &self.policy
    }

    /// Active sites, ordered by id.
    pub fn sites(&self) -> &[RoadworkSite] {
        &self.sites
    }

    pub fn site(&self, id: SiteId) -> Option<&RoadworkSite> {
        self.sites.iter().find(|s| s.site_id == id)
    }

    pub fn site_of(&self, object_id: ObjectId) -> Option<SiteId> {
        self.sites.iter().find(|s| s.contains(object_id)).map(|s| s.site_id)
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Total members over all sites.
    pub fn member_count(&self) -> usize {
        self.sites.iter().map(|s| s.members.len()).sum()
    }

    /// Drops every site and promoted contour. Site ids keep counting up.
    pub fn clear(&mut self) {
        self.sites.clear();
        self.contours.clear();
    }

    /// Adds a promoted object to every active site it is within separation
    /// limits of (measured in the frame of `pose`), or opens a new site.
    /// Returns the lowest id of the sites joined. Follow with
    /// [`merge_split_sites`](Self::merge_split_sites).
    pub fn assign(&mut self, obj: &TrackedObject, pose: &Pose2D, arc: f64, timestamp: f64) -> SiteId {
        let dir = pose.direction();
        self.contours.insert(
            obj.object_id,
            PromotedContour {
                class: obj.class,
                contour: obj.world_contour.clone(),
            },
        );

        let mut joined = Vec::new();
        for (i, site) in self.sites.iter().enumerate() {
            let near = site.members.iter().any(|m| {
                m.object_id != obj.object_id
                    && self.contours.get(&m.object_id).is_some_and(|c| {
                        within_separation(
                            (obj.class, &obj.world_contour),
                            (c.class, &c.contour),
                            dir,
                            &self.policy,
                        )
                    })
            });
            if near {
                joined.push(i);
            }
        }

        let member = SiteMember {
            object_id: obj.object_id,
            class: obj.class,
            stored_points: Vec::new(),
            longitudinal: 0.0,
        };

        if joined.is_empty() {
            let entry = (obj.object_id, obj.class, obj.world_contour.clone());
            return self.open_site(&[entry], dir, arc, timestamp);
        }

        for &i in &joined {
            let site = &mut self.sites[i];
            if !site.contains(obj.object_id) {
                site.members.push(member.clone());
            }
            site.arc_position = arc;
            site.last_seen = timestamp;
            normalize(site, &self.contours);
        }
        self.sites[joined[0]].site_id
    }

    /// Opens a site holding `members` without any separation check. Members
    /// are re-ordered along `axis`. Returns the new id.
    pub fn open_site(
        &mut self,
        members: &[(ObjectId, ObjectClass, Vec<WorldPoint>)],
        axis: [f64; 2],
        arc: f64,
        timestamp: f64,
    ) -> SiteId {
        for (id, class, contour) in members {
            self.contours.insert(
                *id,
                PromotedContour {
                    class: *class,
                    contour: contour.clone(),
                },
            );
        }
        let site_id = self.next_site_id;
        self.next_site_id += 1;
        let mut site = RoadworkSite {
            site_id,
            members: members
                .iter()
                .map(|(id, class, _)| SiteMember {
                    object_id: *id,
                    class: *class,
                    stored_points: Vec::new(),
                    longitudinal: 0.0,
                })
                .collect(),
            state: SiteState::Active,
            arc_position: arc,
            ghosts: Vec::new(),
            axis,
            first_seen: timestamp,
            last_seen: timestamp,
        };
        normalize(&mut site, &self.contours);
        self.sites.push(site);
        site_id
    }

    /// Merges every group of sites that share an object into the lowest id of
    /// the group (transitively).
    pub fn merge_split_sites(&mut self) {
        let n = self.sites.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut owner: BTreeMap<ObjectId, usize> = BTreeMap::new();
        for (i, site) in self.sites.iter().enumerate() {
            for m in &site.members {
                if let Some(&j) = owner.get(&m.object_id) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                } else {
                    owner.insert(m.object_id, i);
                }
            }
        }
        if (0..n).all(|i| find(&mut parent, i) == i) {
            return;
        }

        // sites are kept ordered by id, so each group's root is its lowest id
        // and is visited before the rest of the group
        let old = core::mem::take(&mut self.sites);
        let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        let mut position: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, site) in old.into_iter().enumerate() {
            let root = roots[i];
            if root == i {
                position.insert(i, self.sites.len());
                self.sites.push(site);
                continue;
            }
            let target = &mut self.sites[position[&root]];
            for m in site.members {
                if !target.contains(m.object_id) {
                    target.members.push(m);
                }
            }
            target.arc_position = target.arc_position.max(site.arc_position);
            target.first_seen = target.first_seen.min(site.first_seen);
            target.last_seen = target.last_seen.max(site.last_seen);
            target.ghosts.clear();
        }
        for site in &mut self.sites {
            normalize(site, &self.contours);
        }
        self.sites.sort_by_key(|s| s.site_id);
    }

    /// Removes sites whose stored points all lie within the convex hull of
    /// another site grown by the lateral separation. Under mutual containment
    /// the site with more members survives, then the lower id. Returns the
    /// removed ids.
    pub fn remove_nested(&mut self) -> Vec<SiteId> {
        let margin = self.policy.lateral;
        let points: Vec<Vec<WorldPoint>> = self.sites.iter().map(|s| s.stored_points()).collect();
        let hulls: Vec<Vec<WorldPoint>> = points.iter().map(|p| convex_hull(p)).collect();
        let n = self.sites.len();
        let inside = |s: usize, o: usize| {
            points[s]
                .iter()
                .all(|p| distance_to_convex_hull(&hulls[o], p, CONTAINMENT_TOLERANCE) <= margin + CONTAINMENT_TOLERANCE)
        };
        let outranks = |o: &RoadworkSite, s: &RoadworkSite| {
            o.members.len() > s.members.len() || (o.members.len() == s.members.len() && o.site_id < s.site_id)
        };
        let mut removed = Vec::new();
        for s in 0..n {
            let nested = (0..n).any(|o| {
                o != s && inside(s, o) && (!inside(o, s) || outranks(&self.sites[o], &self.sites[s]))
            });
            if nested {
                removed.push(self.sites[s].site_id);
            }
        }
        self.sites.retain(|s| !removed.contains(&s.site_id));
        removed
    }

    /// Recomputes the ghost list of every site.
    pub fn update_ghosts(&mut self, visible_ids: &BTreeSet<ObjectId>, pose: &Pose2D) {
        for site in &mut self.sites {
            site.ghosts = ghost_update(site, visible_ids, pose);
        }
    }

    /// Finishes sites whose last member was added more than
    /// [`FINISH_DISTANCE`] of arc length ago and converts them to records.
    /// When this leaves no active site, the book is cleared and
    /// `reset` is set.
    pub fn finalize_check(&mut self, vehicle_arc: f64, anchor: Option<&UtmAnchor>) -> Finalization {
        let mut records = Vec::new();
        let mut keep = Vec::with_capacity(self.sites.len());
        for mut site in core::mem::take(&mut self.sites) {
            if vehicle_arc - site.arc_position > FINISH_DISTANCE {
                site.state = SiteState::Finished;
                records.push(site_record(&site, anchor));
            } else {
                keep.push(site);
            }
        }
        self.sites = keep;
        let reset = !records.is_empty() && self.sites.is_empty();
        if reset {
            self.clear();
        }
        Finalization { records, reset }
    }
}

/// Re-orders members along the site axis and rebuilds stored points so that
/// only the head keeps its full contour.
fn normalize(site: &mut RoadworkSite, contours: &BTreeMap<ObjectId, PromotedContour>) {
    let axis = site.axis;
    for m in &mut site.members {
        let contour = contours.get(&m.object_id).map(|c| c.contour.as_slice()).unwrap_or(&[]);
        m.longitudinal = contour
            .iter()
            .map(|p| p.x * axis[0] + p.y * axis[1])
            .fold(f64::INFINITY, f64::min);
    }
    site.members
        .sort_by(|a, b| a.longitudinal.total_cmp(&b.longitudinal).then(a.object_id.cmp(&b.object_id)));
    for (i, m) in site.members.iter_mut().enumerate() {
        let contour = contours.get(&m.object_id).map(|c| c.contour.as_slice()).unwrap_or(&[]);
        m.stored_points = if i == 0 {
            contour.to_vec()
        } else {
            contour.last().copied().into_iter().collect()
        };
    }
}

fn site_record(site: &RoadworkSite, anchor: Option<&UtmAnchor>) -> SiteRecord {
    let raw = site.stored_points();
    let hull = convex_hull(&raw);
    let map = |p: &WorldPoint| match anchor {
        Some(a) => a.to_utm(p),
        None => p.xy(),
    };
    SiteRecord {
        site_id: site.site_id,
        frame: match anchor {
            Some(a) => OutputFrame::Utm { zone: a.zone.clone() },
            None => OutputFrame::Local,
        },
        raw_polygon: raw.iter().map(map).collect(),
        hull_polygon: hull.iter().map(map).collect(),
        dimensions: dimensions_of_points(&raw),
        class_counts: site.class_counts(),
        start_time: site.first_seen,
        end_time: site.last_seen,
    }
}
