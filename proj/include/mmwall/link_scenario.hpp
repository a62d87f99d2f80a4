#pragma once

// Two-dimensional room model: an AP, the surface mounted in a wall, users and
// human blockers. Decides lens vs mirror relay from geometry, budgets each
// path with Friis loss, and simulates the multi-armed beam sweep.

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "mmwall/array_beam.hpp"

namespace mmwall {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Segment {
    Vec2 a;
    Vec2 b;
};

struct SceneGeometry {
    Vec2 ap{-3.0, 0.0};
    Vec2 surface_center{0.0, 0.0};
    Vec2 surface_normal{1.0, 0.0};  // points into the room opposite the AP
    std::vector<Vec2> users;
    std::vector<Segment> blockers;
    double wall_attenuation_db = 15.0;

    // AP 3 m in front of the wall; one user 3 m behind it on axis, one behind
    // it off axis, and one in the AP's room whose line of sight is blocked.
    static SceneGeometry default_two_room();

    /// Rotates the normal by +90 deg; positive tangential offsets use this axis.
    Vec2 tangent() const { return {-surface_normal.y, surface_normal.x}; }
    /// Signed distance of p from the wall plane.
    double side_of(Vec2 p) const { return dot(p - surface_center, surface_normal); }

    void validate() const;
};

struct LinkParameters {
    double tx_power_dbm = 10.0;
    double ap_gain_dbi = 20.0;
    double user_gain_dbi = 20.0;
    double blockage_db = 20.0;
    double carrier_hz = 24e9;
    double modulation_hz = 30e6;
    double sensitivity_dbm = -70.0;
    double min_distance_m = 0.1;
};

struct GeometryAngles {
    double incident_rad = 0.0;   // propagation direction of the arriving wave
    double departure_rad = 0.0;  // direction from the surface to the user
    RelayMode mode = RelayMode::lens;

    /// sin(departure) - sin(incident): the progressive phase the surface must add.
    double steering_sine() const { return std::sin(departure_rad) - std::sin(incident_rad); }
};

// Angles are measured from the surface normal on the relevant side, signed by
// the tangent axis, so a specular reflection has departure == incident. Lens
// when AP and user lie on opposite sides of the wall plane, mirror otherwise.
GeometryAngles compute_geometry_angles(const SceneGeometry& scene, std::size_t user);

struct Blockage {
    bool blocked = false;
    std::optional<std::size_t> blocker;
};

/// Closed segment-segment test against every blocker; touching counts as blocked.
Blockage blockage_check(const SceneGeometry& scene, Vec2 from, Vec2 to);

double friis_loss_db(double distance_m, double f_hz);

enum class PathType { direct, lens, mirror, blocked };
const char* to_string(PathType p);

/// What the surface contributes to one relayed path.
struct SurfaceLink {
    int harmonic = -1;
    double efficiency = 1.0;    // fraction of incident power in that harmonic
    double pattern_gain = 1.0;  // |AF|^2 toward the user, 1 when steered at them
};

struct LinkEntry {
    std::size_t user = 0;
    PathType path = PathType::direct;
    double received_dbm = 0.0;
    double path_loss_db = 0.0;  // antenna-to-antenna loss
    int harmonic = 0;
    double incident_deg = 0.0;
    double departure_deg = 0.0;
    double steering_deg = 0.0;
    std::optional<std::size_t> blocker;
    bool distance_clamped = false;
};

/// Unaided AP -> user path: Friis + wall attenuation when it crosses the wall.
LinkEntry direct_link(const SceneGeometry& scene, std::size_t user, const LinkParameters& params);

// Relay through the surface. The two hops are unfolded into one Friis term
// over d1 + d2 at f_c + h Omega, plus insertion loss -10 log10(efficiency),
// pattern loss, and the blockage penalty for each blocked hop.
LinkEntry link_budget(const SceneGeometry& scene, std::size_t user, const SurfaceLink& surface,
                      const LinkParameters& params);

struct LinkReport {
    std::vector<LinkEntry> entries;
};

// Best of direct and relayed path per user. `lens` and `mirror` carry the
// surface efficiency in each mode.
LinkReport evaluate_links(const SceneGeometry& scene, const SurfaceLink& lens,
                          const SurfaceLink& mirror, const LinkParameters& params);

/// Columns: user, mode, path_db, angle_deg, harmonic, received_dbm.
void write_link_report_csv(std::ostream& os, const LinkReport& report);

// ---------------------------------------------------------------------------

/// Efficiency of one beam arm in each relay mode.
struct ArmEfficiency {
    int harmonic = -1;
    double lens = 0.0;
    double mirror = 0.0;
};

struct SearchConfig {
    int split = 1;  // 1: one arm; 2: harmonics -1 and +1 swept as mirrored arms
    double step_deg = 2.0;
    double range_deg = 120.0;
    std::vector<ArmEfficiency> arms;  // arms[0] is the swept harmonic, arms[1] its twin

    int sweep_count() const;
    void validate() const;
};

struct UserBest {
    std::size_t user = 0;
    bool found = false;
    double steering_deg = 0.0;
    double departure_deg = 0.0;
    double received_dbm = -std::numeric_limits<double>::infinity();
    int harmonic = 0;
};

struct SearchResult {
    int evaluations = 0;
    std::vector<UserBest> users;
};

class SearchFailed : public Error {
public:
    SearchFailed(const std::string& what, SearchResult attempt)
        : Error(what), best_attempt(std::move(attempt)) {}
    SearchResult best_attempt;
};

// Sweeps the steering gradient across range_deg. With split = 2 the -1 arm
// covers one half while the +1 arm mirrors it, so ceil(range/step/2) pattern
// evaluations replace ceil(range/step). Users whose relay hops are blocked
// are treated as outages. Throws SearchFailed if no user clears the
// sensitivity threshold.
SearchResult beam_search(const SceneGeometry& scene, const SearchConfig& config,
                         const ArrayLayout& layout, const LinkParameters& params);

}  // namespace mmwall
