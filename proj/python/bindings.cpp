// Python bindings for the replanning core: maps, splines, topological
// guiding paths, the two-phase optimizer and the full replan pipeline.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pathguide/replan.hpp"
#include "pathguide/scenario.hpp"

namespace py = pybind11;
using namespace pathguide;

PYBIND11_MODULE(_pathguide, m) {
  m.doc() = "Path-guided trajectory replanning";

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_readwrite("origin", &GridSpec::origin)
      .def_readwrite("voxel_size", &GridSpec::voxel_size)
      .def_readwrite("dims", &GridSpec::dims)
      .def("cell_count", &GridSpec::cell_count)
      .def("center_of", &GridSpec::center_of)
      .def("index_of", &GridSpec::index_of);

  py::class_<QueryPolicy>(m, "QueryPolicy")
      .def(py::init<>())
      .def_readwrite("out_of_bounds_distance", &QueryPolicy::out_of_bounds_distance)
      .def_readwrite("margin", &QueryPolicy::margin);

  py::class_<LineVisibility>(m, "LineVisibility")
      .def_readonly("visible", &LineVisibility::visible)
      .def_readonly("blocking", &LineVisibility::blocking);

  py::class_<VoxelField>(m, "VoxelField")
      .def(py::init([](const std::vector<uint8_t>& occupancy, const GridSpec& spec,
                       const QueryPolicy& policy) {
             return VoxelField(occupancy, spec, policy);
           }),
           py::arg("occupancy"), py::arg("spec"), py::arg("policy") = QueryPolicy{})
      .def_property_readonly("spec", &VoxelField::spec)
      .def("occupied", &VoxelField::occupied)
      .def("distance_at", &VoxelField::distance_at)
      .def("gradient_at", &VoxelField::gradient_at)
      .def("line_visible",
           py::overload_cast<const Vec3&, const Vec3&, double>(
               &VoxelField::line_visible, py::const_),
           py::arg("a"), py::arg("b"), py::arg("margin"))
      .def("save_file", &VoxelField::save_file)
      .def_static("load_file", &VoxelField::load_file, py::arg("path"),
                  py::arg("policy") = QueryPolicy{});

  py::class_<UniformBSpline>(m, "UniformBSpline")
      .def(py::init<int, std::vector<Vec3>, double>(), py::arg("degree"),
           py::arg("ctrl_pts"), py::arg("dt"))
      .def_property_readonly("degree", &UniformBSpline::degree)
      .def_property_readonly("dt", &UniformBSpline::dt)
      .def_property_readonly("ctrl_pts",
                             [](const UniformBSpline& s) { return s.ctrl_pts(); })
      .def_property_readonly("t_min", &UniformBSpline::t_min)
      .def_property_readonly("t_max", &UniformBSpline::t_max)
      .def_property_readonly("duration", &UniformBSpline::duration)
      .def("evaluate", &UniformBSpline::evaluate)
      .def("velocity", &UniformBSpline::velocity)
      .def("acceleration", &UniformBSpline::acceleration)
      .def("jerk", &UniformBSpline::jerk)
      .def("smoothness_metric", &UniformBSpline::smoothness_metric)
      .def("__repr__", [](const UniformBSpline& s) {
        std::ostringstream os;
        os << "UniformBSpline(degree=" << s.degree() << ", n=" << s.num_ctrl_pts()
           << ", dt=" << s.dt() << ")";
        return os.str();
      });

  py::class_<TopoConfig>(m, "TopoConfig")
      .def(py::init<>())
      .def_readwrite("t_max", &TopoConfig::t_max)
      .def_readwrite("n_max", &TopoConfig::n_max)
      .def_readwrite("k_uvd", &TopoConfig::k_uvd)
      .def_readwrite("k_max", &TopoConfig::k_max)
      .def_readwrite("r_max", &TopoConfig::r_max)
      .def_readwrite("margin", &TopoConfig::margin)
      .def_readwrite("max_raw_paths", &TopoConfig::max_raw_paths)
      .def_readwrite("deterministic", &TopoConfig::deterministic);

  py::class_<TopoRoadmap>(m, "TopoRoadmap")
      .def_property_readonly("num_nodes",
                             [](const TopoRoadmap& r) { return r.nodes.size(); })
      .def_readonly("samples_drawn", &TopoRoadmap::samples_drawn);

  m.def("uvd_equivalent", &uvd_equivalent, py::arg("a"), py::arg("b"),
        py::arg("field"), py::arg("cfg"));
  m.def(
      "build_roadmap",
      [](const VoxelField& field, const Vec3& s, const Vec3& g,
         const TopoConfig& cfg, uint64_t seed) {
        return build_roadmap(field, s, g, field.spec().bounds(), cfg, seed);
      },
      py::arg("field"), py::arg("start"), py::arg("goal"), py::arg("cfg"),
      py::arg("seed"));
  m.def("search_paths", &search_paths, py::arg("roadmap"), py::arg("cfg"));
  m.def(
      "shorten_path",
      [](const Polyline& path, const VoxelField& field, const TopoConfig& cfg) {
        auto res = shorten_path(path, field, cfg);
        return py::make_tuple(res.path, res.push_away_failed);
      },
      py::arg("path"), py::arg("field"), py::arg("cfg"),
      "Returns (path, push_away_failed).");

  py::class_<PgoWeights>(m, "PgoWeights")
      .def(py::init<>())
      .def_readwrite("lambda1_s", &PgoWeights::lambda1_s)
      .def_readwrite("lambda1_g", &PgoWeights::lambda1_g)
      .def_readwrite("lambda2_s", &PgoWeights::lambda2_s)
      .def_readwrite("lambda2_c", &PgoWeights::lambda2_c)
      .def_readwrite("lambda2_d", &PgoWeights::lambda2_d)
      .def_readwrite("clearance", &PgoWeights::clearance)
      .def_readwrite("v_max", &PgoWeights::v_max)
      .def_readwrite("a_max", &PgoWeights::a_max);

  py::class_<GuidingPath>(m, "GuidingPath")
      .def(py::init<Polyline>(), py::arg("waypoints"))
      .def_property_readonly("waypoints", &GuidingPath::waypoints)
      .def_property_readonly("length", &GuidingPath::length)
      .def("point_at_fraction", &GuidingPath::point_at_fraction);

  py::class_<OptimizationReport>(m, "OptimizationReport")
      .def_readonly("converged", &OptimizationReport::converged)
      .def_readonly("iterations", &OptimizationReport::iterations)
      .def_readonly("final_cost", &OptimizationReport::final_cost)
      .def_readonly("elapsed", &OptimizationReport::elapsed)
      .def_readonly("phase", &OptimizationReport::phase);

  m.def("phase1_solve", &phase1_solve, py::arg("init"), py::arg("path"),
        py::arg("weights"));
  m.def("phase2_refine", &phase2_refine, py::arg("warmup"), py::arg("field"),
        py::arg("weights"), py::arg("budget_s"), py::arg("deterministic") = false);

  py::class_<PgoResult>(m, "PgoResult")
      .def_readonly("trajectory", &PgoResult::trajectory)
      .def_readonly("phase1", &PgoResult::phase1)
      .def_readonly("phase2", &PgoResult::phase2);
  m.def("pgo_replan", &pgo_replan, py::arg("init"), py::arg("guide"),
        py::arg("field"), py::arg("weights"), py::arg("budget_s"),
        py::arg("deterministic") = false);

  py::class_<ReplanRequest>(m, "ReplanRequest")
      .def(py::init([](const UniformBSpline& ref) { return ReplanRequest{ref}; }),
           py::arg("reference"))
      .def_readwrite("reference", &ReplanRequest::reference)
      .def_readwrite("t_now", &ReplanRequest::t_now)
      .def_readwrite("horizon", &ReplanRequest::horizon)
      .def_readwrite("cube_inflation", &ReplanRequest::cube_inflation)
      .def_readwrite("roadmap_budget_s", &ReplanRequest::roadmap_budget_s)
      .def_readwrite("optimize_budget_s", &ReplanRequest::optimize_budget_s)
      .def_readwrite("ctrl_pt_spacing", &ReplanRequest::ctrl_pt_spacing)
      .def_readwrite("weights", &ReplanRequest::weights)
      .def_readwrite("topo", &ReplanRequest::topo)
      .def_readwrite("rng_seed", &ReplanRequest::rng_seed)
      .def_readwrite("deterministic", &ReplanRequest::deterministic);

  py::class_<ReplanCandidate>(m, "ReplanCandidate")
      .def_readonly("guide", &ReplanCandidate::guide)
      .def_readonly("trajectory", &ReplanCandidate::trajectory)
      .def_readonly("total_cost", &ReplanCandidate::total_cost)
      .def_readonly("failed", &ReplanCandidate::failed);

  py::class_<ReplanOutcome>(m, "ReplanOutcome")
      .def_readonly("triggered", &ReplanOutcome::triggered)
      .def_readonly("segment", &ReplanOutcome::segment)
      .def_readonly("initial", &ReplanOutcome::initial)
      .def_readonly("candidates", &ReplanOutcome::candidates)
      .def_readonly("best", &ReplanOutcome::best)
      .def_readonly("roadmap_seconds", &ReplanOutcome::roadmap_seconds)
      .def_readonly("optimize_seconds", &ReplanOutcome::optimize_seconds);

  m.def("check_collision", &check_collision, py::arg("reference"), py::arg("field"),
        py::arg("t_now"), py::arg("horizon"), py::arg("clearance"));
  m.def("replan", &replan, py::arg("request"), py::arg("field"),
        py::call_guard<py::gil_scoped_release>());
  m.def("unguided_replan", &unguided_replan, py::arg("request"), py::arg("field"),
        py::call_guard<py::gil_scoped_release>());

  py::enum_<DensityTier>(m, "DensityTier")
      .value("LOW", DensityTier::kLow)
      .value("MEDIUM", DensityTier::kMedium)
      .value("HIGH", DensityTier::kHigh);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("rng_seed", &ScenarioConfig::rng_seed)
      .def_readwrite("tasks", &ScenarioConfig::tasks)
      .def_readwrite("test_mode", &ScenarioConfig::test_mode)
      .def_readwrite("weights", &ScenarioConfig::weights)
      .def_readwrite("topo", &ScenarioConfig::topo)
      .def("set", &ScenarioConfig::set)
      .def_static("from_file", &ScenarioConfig::from_file);

  py::class_<GeneratedTask>(m, "GeneratedTask")
      .def_readonly("field", &GeneratedTask::field)
      .def_readonly("start", &GeneratedTask::start)
      .def_readonly("goal", &GeneratedTask::goal)
      .def_readonly("reference", &GeneratedTask::reference);

  m.def("task_seed", &task_seed, py::arg("cfg"), py::arg("tier"), py::arg("task_id"));
  m.def("generate_map", &generate_map, py::arg("cfg"), py::arg("tier"),
        py::arg("seed"));
  m.def("make_request", &make_request, py::arg("cfg"), py::arg("task"),
        py::arg("seed"));
  m.def("trajectory_feasible", &trajectory_feasible, py::arg("trajectory"),
        py::arg("field"), py::arg("weights"));
  m.def(
      "run_benchmark",
      [](const ScenarioConfig& cfg, const std::vector<DensityTier>& tiers) {
        BenchmarkResult res;
        {
          py::gil_scoped_release release;
          res = run_benchmark(cfg, tiers);
        }
        return py::make_tuple(res.csv(), res.summary());
      },
      py::arg("cfg"), py::arg("tiers"), "Returns (csv, summary) strings.");
}
