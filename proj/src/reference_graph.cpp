// Bundled reference vasculature: 94 straight segments laid out on a body
// roughly 1.2 m tall. Arteries run in the anterior plane (z = +1.5 cm),
// veins in the posterior plane (z = -1.5 cm); organ, limb and head
// transitions cross between the two planes at 1 cm/s. The heart segment
// runs posterior to anterior through the origin.

#include <map>
#include <string>
#include <vector>

#include "nanoflow/rng.hpp"
#include "nanoflow/vasculature.hpp"

namespace nanoflow::vasculature {

namespace {

constexpr double kScale = 0.87;
constexpr double kArterialZ = 1.5;
constexpr double kVenousZ = -1.5;
constexpr std::uint64_t kVeinSpeedSeed = 0x6E616E6F666C6F77ULL;

struct ArterySpec {
  const char* name;
  const char* parent;  // nullptr: leaves the heart
  double x, y;         // segment end (unscaled)
  double speed;
  const char* bed;     // transition name for leaf arteries, else nullptr
  double bed_x, bed_y; // transition end (unscaled)
};

// Parents are listed before children.
constexpr ArterySpec kArteries[] = {
    {"aortic_root", nullptr, 0, 6, 20, nullptr, 0, 0},
    {"aortic_arch", "aortic_root", -3, 11, 20, nullptr, 0, 0},
    {"brachiocephalic", "aortic_arch", 4, 14, 10, nullptr, 0, 0},
    {"r_common_carotid", "brachiocephalic", 5, 26, 10, nullptr, 0, 0},
    {"l_common_carotid", "aortic_arch", -5, 26, 10, nullptr, 0, 0},
    {"r_subclavian", "brachiocephalic", 18, 12, 10, nullptr, 0, 0},
    {"l_subclavian", "aortic_arch", -18, 12, 10, nullptr, 0, 0},
    {"thoracic_aorta", "aortic_arch", -1, -16, 20, nullptr, 0, 0},
    {"abdominal_aorta", "thoracic_aorta", 0, -28, 20, nullptr, 0, 0},
    {"celiac_trunk", "abdominal_aorta", 2, -24, 10, nullptr, 0, 0},
    {"lower_abdominal_aorta", "abdominal_aorta", 0, -40, 20, nullptr, 0, 0},
    {"r_femoral", "lower_abdominal_aorta", 9, -72, 10, nullptr, 0, 0},
    {"l_femoral", "lower_abdominal_aorta", -9, -72, 10, nullptr, 0, 0},
    {"r_popliteal", "r_femoral", 10, -90, 10, nullptr, 0, 0},
    {"l_popliteal", "l_femoral", -10, -90, 10, nullptr, 0, 0},
    {"r_external_carotid", "r_common_carotid", 8, 32, 10, "r_face", 8, 38},
    {"r_internal_carotid", "r_common_carotid", 3, 38, 10, "r_brain", 7, 52},
    {"l_external_carotid", "l_common_carotid", -8, 32, 10, "l_face", -8, 38},
    {"l_internal_carotid", "l_common_carotid", -3, 38, 10, "l_brain", -7, 52},
    {"r_deep_brachial", "r_subclavian", 22, -5, 10, "r_upper_arm", 26, -12},
    {"r_radial", "r_subclavian", 24, -40, 10, "r_hand", 27, -52},
    {"l_deep_brachial", "l_subclavian", -22, -5, 10, "l_upper_arm", -26, -12},
    {"l_radial", "l_subclavian", -24, -40, 10, "l_hand", -27, -52},
    {"hepatic", "celiac_trunk", 9, -18, 10, "liver", 19, -4},
    {"gastric", "celiac_trunk", -6, -20, 10, "stomach", -10, -13},
    {"splenic", "celiac_trunk", -12, -22, 10, "spleen", -13, -21},
    {"superior_mesenteric", "abdominal_aorta", 1, -38, 10, "intestine", -12, -46},
    {"r_renal", "abdominal_aorta", 8, -30, 10, "r_kidney", 11, -34},
    {"l_renal", "abdominal_aorta", -8, -30, 10, "l_kidney", -11, -34},
    {"median_sacral", "lower_abdominal_aorta", 0, -50, 10, "pelvis", 0, -56},
    {"r_deep_femoral", "r_femoral", 13, -80, 10, "r_thigh", 16, -88},
    {"l_deep_femoral", "l_femoral", -13, -80, 10, "l_thigh", -16, -88},
    {"r_posterior_tibial", "r_popliteal", 12, -112, 10, "r_calf", 14, -118},
    {"r_anterior_tibial", "r_popliteal", 9, -120, 10, "r_foot", 7, -131},
    {"l_posterior_tibial", "l_popliteal", -12, -112, 10, "l_calf", -14, -118},
    {"l_anterior_tibial", "l_popliteal", -9, -120, 10, "l_foot", -7, -131},
};

std::string mirror_key(const std::string& name) {
  if (name.rfind("r_", 0) == 0 || name.rfind("l_", 0) == 0) return name.substr(2);
  return name;
}

}  // namespace

VesselGraph build_reference_vasculature() {
  const Position3 heart_in{0.0, 0.0, -2.0};
  const Position3 heart_out{0.0, 0.0, 2.0};

  const int n_art = static_cast<int>(std::size(kArteries));
  std::map<std::string, int> art_index;
  for (int i = 0; i < n_art; ++i) art_index[kArteries[i].name] = i;

  int n_beds = 0;
  for (const auto& a : kArteries) n_beds += a.bed != nullptr;

  // Id layout: heart, arteries, transitions, veins.
  const int heart = 0;
  auto artery_id = [](int i) { return 1 + i; };
  std::vector<int> bed_id(static_cast<std::size_t>(n_art), -1);
  {
    int next = 1 + n_art;
    for (int i = 0; i < n_art; ++i) {
      if (kArteries[i].bed) bed_id[static_cast<std::size_t>(i)] = next++;
    }
  }
  auto vein_id = [&](int i) { return 1 + n_art + n_beds + i; };

  // Vein speeds are drawn once per left/right pair so mirrored loops take
  // identical time.
  Rng rng(kVeinSpeedSeed);
  std::map<std::string, double> vein_speed;
  for (const auto& a : kArteries) {
    const std::string key = mirror_key(a.name);
    if (!vein_speed.count(key)) vein_speed[key] = rng.uniform(2.0, 4.0);
  }

  auto art_end = [&](int i) {
    return Position3{kScale * kArteries[i].x, kScale * kArteries[i].y, kArterialZ};
  };
  auto art_start = [&](int i) {
    const char* p = kArteries[i].parent;
    return p ? art_end(art_index.at(p)) : heart_out;
  };

  std::vector<Vessel> vessels;
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n_art));
  std::vector<int> roots;
  for (int i = 0; i < n_art; ++i) {
    if (kArteries[i].parent) {
      children[static_cast<std::size_t>(art_index.at(kArteries[i].parent))].push_back(i);
    } else {
      roots.push_back(i);
    }
  }

  Vessel h;
  h.id = heart;
  h.name = "heart";
  h.start = heart_in;
  h.end = heart_out;
  h.region_type = RegionType::ArterialFast;
  h.speed_cm_s = 10.0;
  h.is_heart = true;
  for (int r : roots) h.successors.push_back(artery_id(r));
  vessels.push_back(h);

  for (int i = 0; i < n_art; ++i) {
    const auto& a = kArteries[i];
    Vessel v;
    v.id = artery_id(i);
    v.name = a.name;
    v.start = art_start(i);
    v.end = art_end(i);
    v.region_type = RegionType::ArterialFast;
    v.speed_cm_s = a.speed;
    if (a.bed) {
      v.successors.push_back(bed_id[static_cast<std::size_t>(i)]);
    } else {
      for (int c : children[static_cast<std::size_t>(i)]) v.successors.push_back(artery_id(c));
    }
    vessels.push_back(std::move(v));
  }

  for (int i = 0; i < n_art; ++i) {
    const auto& a = kArteries[i];
    if (!a.bed) continue;
    Vessel t;
    t.id = bed_id[static_cast<std::size_t>(i)];
    t.name = a.bed;
    t.start = art_end(i);
    t.end = {kScale * a.bed_x, kScale * a.bed_y, kVenousZ};
    t.region_type = RegionType::Transition;
    t.speed_cm_s = 1.0;
    t.successors.push_back(vein_id(i));
    vessels.push_back(std::move(t));
  }

  for (int i = 0; i < n_art; ++i) {
    const auto& a = kArteries[i];
    Vessel v;
    v.id = vein_id(i);
    v.name = std::string(a.name) + "_vein";
    const Position3 s = art_start(i);
    v.start = a.bed ? Position3{kScale * a.bed_x, kScale * a.bed_y, kVenousZ}
                    : Position3{art_end(i).x, art_end(i).y, kVenousZ};
    v.end = a.parent ? Position3{s.x, s.y, kVenousZ} : heart_in;
    v.region_type = RegionType::Venous;
    v.speed_cm_s = vein_speed.at(mirror_key(a.name));
    v.successors.push_back(a.parent ? vein_id(art_index.at(a.parent)) : heart);
    vessels.push_back(std::move(v));
  }

  return VesselGraph(std::move(vessels));
}

}  // namespace nanoflow::vasculature
