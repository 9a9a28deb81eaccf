#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "gnssguard/attack_forge.hpp"
#include "gnssguard/dtw.hpp"
#include "gnssguard/error.hpp"
#include "gnssguard/fusion_detector.hpp"
#include "gnssguard/report.hpp"
#include "gnssguard/shift_predictor.hpp"
#include "gnssguard/trajectory.hpp"
#include "gnssguard/turn_detector.hpp"

namespace py = pybind11;
using namespace gnssguard;

namespace {

py::dict dtw_to_dict(const DtwResult& r) {
  py::dict d;
  d["distance"] = r.distance;
  d["path"] = r.path.pairs;
  return d;
}

py::dict record_columns(const Trajectory& traj) {
  std::vector<double> t, lat, lon, accel, steer, speed;
  for (const auto& r : traj.records) {
    t.push_back(r.t);
    lat.push_back(r.lat);
    lon.push_back(r.lon);
    accel.push_back(r.accel_pct);
    steer.push_back(r.steer_deg);
    speed.push_back(r.speed);
  }
  py::dict d;
  d["ts"] = t;
  d["lat"] = lat;
  d["lon"] = lon;
  d["accel_pct"] = accel;
  d["steer_deg"] = steer;
  d["speed"] = speed;
  return d;
}

// JSON documents cross the boundary as strings; the Python side parses them.
std::string detect_file(const std::string& input, const std::string& model_path, const std::string& templates_path) {
  const auto model = load_model(model_path);
  const auto bank = load_template_bank(templates_path);
  const auto traj = read_trajectory_csv(input);
  return detection_to_json(run_detection(traj, model, bank, DetectorConfig{})).dump();
}

}  // namespace

PYBIND11_MODULE(_gnssguard, m) {
  m.doc() = "GNSS spoofing detection core";
  py::register_exception<Error>(m, "GnssGuardError", PyExc_ValueError);

  m.attr("EARTH_RADIUS_M") = kEarthRadiusM;

  m.def(
      "haversine_distance",
      [](double lat1, double lon1, double lat2, double lon2) {
        return haversine_distance(GeoPoint::from_degrees(lat1, lon1), GeoPoint::from_degrees(lat2, lon2));
      },
      py::arg("lat1_deg"), py::arg("lon1_deg"), py::arg("lat2_deg"), py::arg("lon2_deg"));

  m.def("dtw_exact", [](const std::vector<double>& t, const std::vector<double>& s) { return dtw_to_dict(dtw_exact(t, s)); });
  m.def(
      "fastdtw",
      [](const std::vector<double>& t, const std::vector<double>& s, std::size_t radius) {
        return dtw_to_dict(fastdtw(t, s, radius));
      },
      py::arg("t"), py::arg("s"), py::arg("radius") = 1);

  m.def("compute_error_threshold", &compute_error_threshold, py::arg("max_abs_error"),
        py::arg("gnss_positioning_error"));
  m.def(
      "check_shift",
      [](double perceived, double predicted, double threshold) -> py::object {
        const auto a = check_shift(perceived, predicted, threshold);
        return a ? py::object(py::float_(a->difference)) : py::object(py::none());
      },
      "Difference in meters when it exceeds the threshold, else None.");

  m.def(
      "synthesize_trajectory",
      [](const std::string& route_json, double rate_hz, std::uint64_t seed, bool noise) {
        const Route route = route_from_json(nlohmann::json::parse(route_json));
        return record_columns(generate_synthetic_trajectory(route, rate_hz, noise ? NoiseModel{} : NoiseModel::none(), seed));
      },
      py::arg("route_json"), py::arg("rate_hz") = 120.0, py::arg("seed") = 0, py::arg("noise") = true,
      "Column dict (ts, lat, lon, accel_pct, steer_deg, speed) for a route JSON document.");

  m.def(
      "classify_turn",
      [](const std::vector<double>& steering_5hz, std::size_t bank_size, std::uint64_t seed, std::size_t k) {
        const auto bank = synthesize_template_bank(bank_size, seed);
        TurnSegment seg;
        seg.series.v = steering_5hz;
        return std::string(to_string(knn_classify(seg, bank, k, dtw_distance_fn(1)).label));
      },
      py::arg("steering_5hz"), py::arg("bank_size") = 40, py::arg("seed") = 0, py::arg("k") = 1,
      "Left/Right verdict against a synthetic template bank.");

  m.def("synthesize_turn_curve", [](const std::string& label, std::uint64_t seed) {
    Rng rng(seed);
    return synthesize_turn_curve(turn_label_from_string(label), rng);
  });

  m.def("detect_file", &detect_file, py::arg("input_csv"), py::arg("model_path"), py::arg("templates_path"),
        "Detection result for one trajectory CSV as a JSON string.");
}
