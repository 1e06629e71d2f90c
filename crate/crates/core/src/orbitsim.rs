//! Walker-Delta constellations on ideal circular orbits, Earth-fixed
//! geometry, conical field-of-view visibility and the spherical Earth grid.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ground::RngStream;

pub const EARTH_RADIUS_KM: f64 = 6378.137;
pub const EARTH_MU_KM3_S2: f64 = 398_600.441_8;
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;

/// `i:T/P/f` plus altitude and epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkerDeltaConfig {
    pub inclination: f64,
    pub satellites: usize,
    pub planes: usize,
    pub phasing: usize,
    pub altitude_km: f64,
    pub epoch_s: f64,
}

impl WalkerDeltaConfig {
    pub fn new(inclination_deg: f64, satellites: usize, planes: usize, phasing: usize) -> Self {
        Self {
            inclination: inclination_deg.to_radians(),
            satellites,
            planes,
            phasing,
            altitude_km: 2000.0,
            epoch_s: 0.0,
        }
    }

    pub fn with_altitude(mut self, altitude_km: f64) -> Self {
        self.altitude_km = altitude_km;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.satellites == 0 || self.planes == 0 {
            return Err(Error::param("T/P", "need at least one satellite and one plane"));
        }
        if !self.satellites.is_multiple_of(self.planes) {
            return Err(Error::param(
                "P",
                format!("{} planes do not divide {} satellites", self.planes, self.satellites),
            ));
        }
        if self.phasing >= self.planes {
            return Err(Error::param(
                "f",
                format!("phasing {} must be below the plane count {}", self.phasing, self.planes),
            ));
        }
        if !(self.altitude_km > 0.0 && self.altitude_km.is_finite()) {
            return Err(Error::param("altitude", format!("{} km must be positive", self.altitude_km)));
        }
        if !self.inclination.is_finite() || !self.epoch_s.is_finite() {
            return Err(Error::param("inclination/epoch", "must be finite"));
        }
        Ok(())
    }
}

/// Elements of one satellite; `a` and `i` are shared by the constellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalElements {
    pub raan: f64,
    /// Argument of latitude at the epoch.
    pub u0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ephemeris {
    pub semi_major_axis: f64,
    pub inclination: f64,
    pub epoch_s: f64,
    pub satellites: Vec<OrbitalElements>,
}

/// Satellite `p·(T/P) + j` sits in plane `p` at slot `j`.
pub fn build_walker_delta(config: &WalkerDeltaConfig) -> Result<Ephemeris> {
    config.validate()?;
    let per_plane = config.satellites / config.planes;
    let mut satellites = Vec::with_capacity(config.satellites);
    for p in 0..config.planes {
        let raan = TAU * p as f64 / config.planes as f64;
        for j in 0..per_plane {
            let u0 = TAU * j as f64 / per_plane as f64
                + TAU * (config.phasing * p) as f64 / config.satellites as f64;
            satellites.push(OrbitalElements {
                raan,
                u0: u0.rem_euclid(TAU),
            });
        }
    }
    Ok(Ephemeris {
        semi_major_axis: EARTH_RADIUS_KM + config.altitude_km,
        inclination: config.inclination,
        epoch_s: config.epoch_s,
        satellites,
    })
}

impl Ephemeris {
    pub fn len(&self) -> usize {
        self.satellites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satellites.is_empty()
    }

    /// `√(μ/a³)` in rad/s.
    pub fn mean_motion(&self) -> f64 {
        (EARTH_MU_KM3_S2 / self.semi_major_axis.powi(3)).sqrt()
    }

    pub fn period(&self) -> f64 {
        TAU / self.mean_motion()
    }

    /// Every satellite's ECEF position at `t`.
    pub fn positions_ecef(&self, t: f64) -> Vec<Vector3<f64>> {
        (0..self.len())
            .map(|s| eci_to_ecef(&propagate(self, s, t), t))
            .collect()
    }
}

/// ECI position (km) of satellite `index` at time `t` (s).
pub fn propagate(ephemeris: &Ephemeris, index: usize, t: f64) -> Vector3<f64> {
    let el = ephemeris.satellites[index];
    let u = el.u0 + ephemeris.mean_motion() * (t - ephemeris.epoch_s);
    let (su, cu) = u.sin_cos();
    let (so, co) = el.raan.sin_cos();
    let (si, ci) = ephemeris.inclination.sin_cos();
    ephemeris.semi_major_axis
        * Vector3::new(co * cu - so * su * ci, so * cu + co * su * ci, su * si)
}

/// Rotate about the pole by `ω⊕ t`; the frames coincide at `t = 0`.
pub fn eci_to_ecef(position: &Vector3<f64>, t: f64) -> Vector3<f64> {
    let (s, c) = (EARTH_ROTATION_RAD_S * t).sin_cos();
    Vector3::new(
        c * position.x + s * position.y,
        -s * position.x + c * position.y,
        position.z,
    )
}

/// Closed-cone test: off-nadir angle `<= half_angle`, and the ground point
/// faces the satellite (`s·g >= |g|²`).
pub fn fov_contains(sat: &Vector3<f64>, ground: &Vector3<f64>, half_angle: f64) -> bool {
    if sat.dot(ground) < ground.norm_squared() * (1.0 - 1e-12) {
        return false;
    }
    let los = ground - sat;
    let scale = los.norm() * sat.norm();
    if scale == 0.0 {
        return true;
    }
    -los.dot(sat) >= scale * (half_angle.cos() - 1e-12)
}

/// Earth central angle from the sub-satellite point to the edge of the
/// footprint, limited by the horizon.
pub fn footprint_half_angle(semi_major_axis: f64, half_angle: f64) -> f64 {
    let x = semi_major_axis / EARTH_RADIUS_KM * half_angle.sin();
    if x >= 1.0 {
        (EARTH_RADIUS_KM / semi_major_axis).acos()
    } else {
        x.asin() - half_angle
    }
}

/// Surface point (km) at latitude/longitude in radians.
pub fn surface_point(lat: f64, lon: f64) -> Vector3<f64> {
    let (sl, cl) = lat.sin_cos();
    let (so, co) = lon.sin_cos();
    EARTH_RADIUS_KM * Vector3::new(cl * co, cl * so, sl)
}

/// `count` points uniform in area on the sphere.
pub fn sample_surface_points(count: usize, rng: &mut RngStream) -> Vec<Vector3<f64>> {
    (0..count)
        .map(|_| {
            let lat = rng.uniform(-1.0, 1.0).asin();
            let lon = rng.uniform(-PI, PI);
            surface_point(lat, lon)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub centroid: Vector3<f64>,
    pub area_km2: f64,
}

/// Latitude bands from the south pole, longitudes from −180°; row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EarthGrid {
    pub resolution_deg: f64,
    pub cells: Vec<GridCell>,
}

impl EarthGrid {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.area_km2).collect()
    }

    pub fn centroids(&self) -> Vec<Vector3<f64>> {
        self.cells.iter().map(|c| c.centroid).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area_km2).sum()
    }
}

pub fn build_grid(resolution_deg: f64) -> Result<EarthGrid> {
    let bands = 180.0 / resolution_deg;
    if !(resolution_deg > 0.0) || (bands - bands.round()).abs() > 1e-9 || bands.round() < 1.0 {
        return Err(Error::param(
            "resolution",
            format!("{resolution_deg}° does not divide 180°"),
        ));
    }
    let rows = bands.round() as usize;
    let cols = 2 * rows;
    let step = PI / rows as f64;
    let r2 = EARTH_RADIUS_KM * EARTH_RADIUS_KM;
    let mut cells = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let lat_min = -PI / 2.0 + step * i as f64;
        let lat_max = lat_min + step;
        let band = r2 * step * (lat_max.sin() - lat_min.sin());
        for k in 0..cols {
            let lon_min = -PI + step * k as f64;
            let lon_max = lon_min + step;
            cells.push(GridCell {
                lat_min,
                lat_max,
                lon_min,
                lon_max,
                centroid: surface_point(0.5 * (lat_min + lat_max), 0.5 * (lon_min + lon_max)),
                area_km2: band,
            });
        }
    }
    Ok(EarthGrid {
        resolution_deg,
        cells,
    })
}

/// For every satellite, the indices of the targets it sees.
pub fn visibility(
    satellites_ecef: &[Vector3<f64>],
    targets_ecef: &[Vector3<f64>],
    half_angle: f64,
) -> Vec<Vec<usize>> {
    satellites_ecef
        .par_iter()
        .map(|sat| {
            targets_ecef
                .iter()
                .enumerate()
                .filter(|(_, g)| fov_contains(sat, g, half_angle))
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}

/// Cells whose centroid lies in the field of view of a selected satellite.
pub fn covered_cells(
    ephemeris: &Ephemeris,
    grid: &EarthGrid,
    selection: &[usize],
    t: f64,
    half_angle: f64,
) -> Vec<usize> {
    let mut mark = vec![false; grid.len()];
    for &s in selection {
        let sat = eci_to_ecef(&propagate(ephemeris, s, t), t);
        for (c, cell) in grid.cells.iter().enumerate() {
            if !mark[c] && fov_contains(&sat, &cell.centroid, half_angle) {
                mark[c] = true;
            }
        }
    }
    mark.iter().enumerate().filter(|(_, m)| **m).map(|(c, _)| c).collect()
}

/// 0/1 matrix, one row per satellite and one column per target.
pub fn write_visibility_csv<W: Write>(
    writer: W,
    visibility: &[Vec<usize>],
    targets: usize,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["satellite".to_string()];
    header.extend((0..targets).map(|t| format!("t{t}")));
    w.write_record(&header)?;
    for (s, seen) in visibility.iter().enumerate() {
        let mut row = vec!["0".to_string(); targets + 1];
        row[0] = s.to_string();
        for &t in seen {
            row[t + 1] = "1".to_string();
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn walker_240() -> Ephemeris {
        build_walker_delta(&WalkerDeltaConfig::new(60.0, 240, 12, 1)).unwrap()
    }

    #[test]
    fn walker_spacing() {
        let e = walker_240();
        assert_eq!(e.len(), 240);
        assert!((e.semi_major_axis - 8378.137).abs() < 1e-9);
        let deg = |x: f64| x.to_degrees();
        assert!((deg(e.satellites[20].raan - e.satellites[0].raan) - 30.0).abs() < 1e-9);
        assert!((deg(e.satellites[1].u0 - e.satellites[0].u0) - 18.0).abs() < 1e-9);
        assert!((deg(e.satellites[20].u0 - e.satellites[0].u0) - 1.5).abs() < 1e-9);
    }

    #[test]
    fn degenerate_and_invalid_constellations() {
        let one = build_walker_delta(&WalkerDeltaConfig::new(45.0, 1, 1, 0)).unwrap();
        assert_eq!(one.satellites, vec![OrbitalElements { raan: 0.0, u0: 0.0 }]);
        assert!(build_walker_delta(&WalkerDeltaConfig::new(45.0, 10, 3, 0)).is_err());
        assert!(build_walker_delta(&WalkerDeltaConfig::new(45.0, 12, 3, 3)).is_err());
        assert!(build_walker_delta(&WalkerDeltaConfig::new(45.0, 12, 3, 0).with_altitude(0.0)).is_err());
    }

    #[test]
    fn propagation_reference_and_period() {
        let e = build_walker_delta(&WalkerDeltaConfig::new(37.0, 1, 1, 0)).unwrap();
        let p0 = propagate(&e, 0, 0.0);
        assert!((p0 - Vector3::new(e.semi_major_axis, 0.0, 0.0)).norm() < 1e-12);
        let p1 = propagate(&e, 0, e.period());
        assert!((p1 - p0).norm() < 1e-9 * e.semi_major_axis);
        let expected = (8378.137f64.powi(3) / EARTH_MU_KM3_S2).sqrt() * TAU;
        assert!((e.period() - expected).abs() < 1e-9);
        // Angular rate: angle swept in a short interval.
        let dt = 10.0;
        let angle = (propagate(&e, 0, dt).dot(&p0) / e.semi_major_axis.powi(2)).acos();
        assert!((angle / dt - TAU / expected).abs() < 1e-9);
    }

    #[test]
    fn norm_drift_over_many_steps() {
        let e = walker_240();
        let a = e.semi_major_axis;
        for k in 0..10_000 {
            let r = propagate(&e, k % 240, 60.0 * k as f64).norm();
            assert!((r - a).abs() / a < 1e-9);
        }
    }

    #[test]
    fn ecef_rotation() {
        let v = Vector3::new(1000.0, -2000.0, 3000.0);
        assert_eq!(eci_to_ecef(&v, 0.0), v);
        assert!((eci_to_ecef(&v, TAU / EARTH_ROTATION_RAD_S) - v).norm() < 1e-8);
    }

    proptest! {
        #[test]
        fn ecef_preserves_norm(x in -1e4..1e4f64, y in -1e4..1e4f64, z in -1e4..1e4f64, t in 0.0..1e6f64) {
            let v = Vector3::new(x, y, z);
            prop_assert!((eci_to_ecef(&v, t).norm() - v.norm()).abs() <= 1e-9 * (1.0 + v.norm()));
        }

        #[test]
        fn coverage_monotone_in_selection(mask_s in 0u32..(1 << 12), extra in 0u32..(1 << 12), t in 0.0..6000.0f64) {
            let e = build_walker_delta(&WalkerDeltaConfig::new(60.0, 12, 3, 1)).unwrap();
            let grid = build_grid(15.0).unwrap();
            let s: Vec<usize> = (0..12).filter(|j| mask_s >> j & 1 == 1).collect();
            let t_set: Vec<usize> = (0..12).filter(|j| (mask_s | extra) >> j & 1 == 1).collect();
            let small = covered_cells(&e, &grid, &s, t, PI / 6.0);
            let big = covered_cells(&e, &grid, &t_set, t, PI / 6.0);
            prop_assert!(small.iter().all(|c| big.contains(c)));
        }
    }

    #[test]
    fn fov_special_points() {
        let a = 8378.137;
        let sat = Vector3::new(a, 0.0, 0.0);
        let nadir = Vector3::new(EARTH_RADIUS_KM, 0.0, 0.0);
        assert!(fov_contains(&sat, &nadir, 1e-6));
        assert!(!fov_contains(&sat, &(-nadir), PI / 2.0));
        // Boundary point from the sine rule in the centre-satellite-ground triangle.
        let eta = PI / 6.0;
        let lambda = (a / EARTH_RADIUS_KM * eta.sin()).asin() - eta;
        let edge = surface_point(lambda, 0.0);
        assert!(fov_contains(&sat, &edge, eta));
        assert!(!fov_contains(&sat, &surface_point(lambda + 1e-6, 0.0), eta));
        assert!((footprint_half_angle(a, eta) - lambda).abs() < 1e-15);
    }

    #[test]
    fn wide_cone_is_limited_by_horizon() {
        let a = 8378.137;
        let sat = Vector3::new(a, 0.0, 0.0);
        let horizon = (EARTH_RADIUS_KM / a).acos();
        assert!(!fov_contains(&sat, &surface_point(horizon + 1e-3, 0.0), 1.5));
        assert!(fov_contains(&sat, &surface_point(horizon - 1e-3, 0.0), 1.5));
    }

    #[test]
    fn grid_areas() {
        let sphere = 4.0 * PI * EARTH_RADIUS_KM * EARTH_RADIUS_KM;
        for res in [2.0, 5.0, 10.0, 30.0, 90.0] {
            let g = build_grid(res).unwrap();
            assert_eq!(g.len(), (180.0 / res) as usize * (360.0 / res) as usize);
            assert!((g.total_area() - sphere).abs() / sphere < 1e-6);
        }
        // With 90 bands of 2° the equator is a band edge; the cell just north of it.
        let g = build_grid(2.0).unwrap();
        let step = 2.0f64.to_radians();
        let eq = g.cells.iter().find(|c| c.lat_min.abs() < 1e-12).unwrap();
        let expected = EARTH_RADIUS_KM.powi(2) * step * step.sin();
        assert!((eq.area_km2 - expected).abs() / expected < 1e-12);
        assert!(g.cells[0].area_km2 < eq.area_km2);
        assert!(build_grid(7.0).is_err());
        assert!(build_grid(0.0).is_err());
    }

    #[test]
    fn single_satellite_footprint() {
        let e = build_walker_delta(&WalkerDeltaConfig::new(60.0, 1, 1, 0)).unwrap();
        let grid = build_grid(2.0).unwrap();
        assert!(covered_cells(&e, &grid, &[], 0.0, PI / 6.0).is_empty());
        let cells = covered_cells(&e, &grid, &[0], 0.0, PI / 6.0);
        assert!(!cells.is_empty());
        let lambda = footprint_half_angle(e.semi_major_axis, PI / 6.0);
        let sub = propagate(&e, 0, 0.0).normalize();
        for &c in &cells {
            let angle = (grid.cells[c].centroid.normalize().dot(&sub)).clamp(-1.0, 1.0).acos();
            assert!(angle <= lambda + 1e-9);
        }
        let twice = covered_cells(&e, &grid, &[0, 0], 0.0, PI / 6.0);
        assert_eq!(cells, twice);
    }

    #[test]
    fn footprint_depends_only_on_elements() {
        let e = walker_240();
        let grid = build_grid(10.0).unwrap();
        let mut relabeled = e.clone();
        relabeled.satellites.reverse();
        let t = 1234.0;
        for s in [0usize, 17, 239] {
            let a = covered_cells(&e, &grid, &[s], t, PI / 6.0);
            let b = covered_cells(&relabeled, &grid, &[239 - s], t, PI / 6.0);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sampled_points_on_surface_and_csv() {
        let mut rng = RngStream::new(4);
        let pts = sample_surface_points(50, &mut rng);
        assert!(pts.iter().all(|p| (p.norm() - EARTH_RADIUS_KM).abs() < 1e-6));
        let mut buf = Vec::new();
        write_visibility_csv(&mut buf, &[vec![1], vec![]], 2).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "satellite,t0,t1\n0,0,1\n1,0,0\n");
    }
}
