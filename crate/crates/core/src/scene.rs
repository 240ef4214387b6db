//! Street scenes: one horizontal street plane with the vertical facades that
//! stand at or above it and within a plan-view radius of its hull.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Orientation, PlaneEntity};
use crate::linalg::dominant_direction_2d;
use crate::par;
use crate::pointcloud::PointCloud;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
    #[serde(rename = "unknown")]
    Unknown,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
            Side::Unknown => Side::Unknown,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    /// Entities below this many points per m² of hull area are noise.
    pub min_density: f64,
    /// Plan-view distance from the street hull within which a facade joins.
    pub adjacency_radius: f64,
    /// Facades closer than this to the primary axis get no side.
    pub side_offset: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            min_density: 150.0,
            adjacency_radius: 1.0,
            side_offset: 0.25,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.min_density >= 0.0) {
            problems.push(format!("min_density must be >= 0, got {}", self.min_density));
        }
        if !(self.adjacency_radius >= 0.0) {
            problems.push(format!("adjacency_radius must be >= 0, got {}", self.adjacency_radius));
        }
        if !(self.side_offset >= 0.0) {
            problems.push(format!("side_offset must be >= 0, got {}", self.side_offset));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneFacade {
    pub entity: PlaneEntity,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreetScene {
    pub id: usize,
    pub street: PlaneEntity,
    pub facades: Vec<SceneFacade>,
    /// Unit plan-view direction of the street, with a positive x component
    /// (or +y when along the y axis).
    pub primary_axis: [f64; 2],
}

/// The serialized form of a scene: entity ids instead of entities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneRoster {
    pub scene_id: usize,
    pub street_entity_id: usize,
    pub facade_entity_ids: Vec<usize>,
    pub sides: Vec<Side>,
    pub primary_axis: [f64; 2],
}

impl StreetScene {
    pub fn roster(&self) -> SceneRoster {
        SceneRoster {
            scene_id: self.id,
            street_entity_id: self.street.id,
            facade_entity_ids: self.facades.iter().map(|f| f.entity.id).collect(),
            sides: self.facades.iter().map(|f| f.side).collect(),
            primary_axis: self.primary_axis,
        }
    }

    /// Rebuilds a scene from its roster and the entity list it refers to.
    pub fn from_roster(roster: &SceneRoster, entities: &[PlaneEntity]) -> Result<StreetScene> {
        let find = |id: usize| {
            entities
                .iter()
                .find(|e| e.id == id)
                .cloned()
                .ok_or_else(|| Error::Precondition(format!("scene {} refers to unknown entity {id}", roster.scene_id)))
        };
        if roster.sides.len() != roster.facade_entity_ids.len() {
            return Err(Error::Precondition(format!(
                "scene {}: {} sides for {} facades",
                roster.scene_id,
                roster.sides.len(),
                roster.facade_entity_ids.len()
            )));
        }
        let facades = roster
            .facade_entity_ids
            .iter()
            .zip(&roster.sides)
            .map(|(&id, &side)| Ok(SceneFacade { entity: find(id)?, side }))
            .collect::<Result<Vec<_>>>()?;
        Ok(StreetScene {
            id: roster.scene_id,
            street: find(roster.street_entity_id)?,
            facades,
            primary_axis: roster.primary_axis,
        })
    }

    /// Cloud indices of the street and every facade, ascending and unique.
    pub fn point_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .street
            .indices
            .iter()
            .chain(self.facades.iter().flat_map(|f| f.entity.indices.iter()))
            .copied()
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }
}

/// Splits entities into `(kept, noise)` by hull density.
pub fn filter_noise(entities: &[PlaneEntity], min_density: f64) -> (Vec<PlaneEntity>, Vec<PlaneEntity>) {
    entities.iter().cloned().partition(|e| e.density >= min_density)
}

/// First principal direction of the street's plan-view points, sign fixed.
pub fn primary_axis(cloud: &PointCloud, street: &PlaneEntity) -> [f64; 2] {
    let plan: Vec<[f64; 2]> = street
        .indices
        .iter()
        .map(|&i| {
            let p = cloud.point(i);
            [p.x, p.y]
        })
        .collect();
    let [x, y] = dominant_direction_2d(&plan).unwrap_or([1.0, 0.0]);
    if x < -1e-12 || (x.abs() <= 1e-12 && y < 0.0) {
        [-x, -y]
    } else {
        [x, y]
    }
}

/// Side of `facade` relative to the street: the plan-view cross product of
/// the axis with the centroid offset, `A` when positive.
pub fn side_of(street: &PlaneEntity, axis: [f64; 2], facade: &PlaneEntity, min_offset: f64) -> Side {
    let d = [facade.centroid.x - street.centroid.x, facade.centroid.y - street.centroid.y];
    let cross = axis[0] * d[1] - axis[1] * d[0];
    if cross >= min_offset {
        Side::A
    } else if cross <= -min_offset {
        Side::B
    } else {
        Side::Unknown
    }
}

/// Relabels every facade of `scene` from its geometry.
pub fn assign_sides(mut scene: StreetScene, min_offset: f64) -> StreetScene {
    for f in &mut scene.facades {
        f.side = side_of(&scene.street, scene.primary_axis, &f.entity, min_offset);
    }
    scene
}

/// True when `facade` belongs to a scene on `street`.
pub fn is_adjacent(street: &PlaneEntity, facade: &PlaneEntity, radius: f64) -> bool {
    facade.centroid.z >= street.centroid.z
        && street.plan_footprint().distance_to(&facade.plan_footprint()) <= radius
}

/// Groups kept entities into scenes. Facades may join several scenes.
/// Scenes are numbered from 1 by descending street elevation (ties by entity
/// id); streets without facades produce no scene.
pub fn build_scenes(cloud: &PointCloud, entities: &[PlaneEntity], params: &SceneParams) -> Vec<StreetScene> {
    let mut streets: Vec<&PlaneEntity> = entities
        .iter()
        .filter(|e| e.orientation == Orientation::Horizontal)
        .collect();
    if streets.is_empty() {
        tracing::warn!("no horizontal planes; no street scenes");
        return Vec::new();
    }
    streets.sort_by(|a, b| b.centroid.z.total_cmp(&a.centroid.z).then(a.id.cmp(&b.id)));
    let verticals: Vec<&PlaneEntity> = entities
        .iter()
        .filter(|e| e.orientation == Orientation::Vertical)
        .collect();
    let built: Vec<Option<StreetScene>> = par::map(&streets, |street| {
        let axis = primary_axis(cloud, street);
        let facades: Vec<SceneFacade> = verticals
            .iter()
            .filter(|f| is_adjacent(street, f, params.adjacency_radius))
            .map(|f| SceneFacade {
                entity: (*f).clone(),
                side: side_of(street, axis, f, params.side_offset),
            })
            .collect();
        (!facades.is_empty()).then(|| StreetScene {
            id: 0,
            street: (*street).clone(),
            facades,
            primary_axis: axis,
        })
    });
    let scenes: Vec<StreetScene> = built
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(k, s)| StreetScene { id: k + 1, ..s })
        .collect();
    let planes: Vec<usize> = scenes.iter().map(|s| 1 + s.facades.len()).collect();
    tracing::info!(scenes = scenes.len(), ?planes, "built street scenes");
    scenes
}
