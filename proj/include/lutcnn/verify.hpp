/*!
  \file verify.hpp
  \brief Randomized equivalence check between a netlist and the float reference
*/

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "netlist.hpp"
#include "reference.hpp"
#include "simulate.hpp"
#include "transform.hpp"

namespace lutcnn
{

struct window_mismatch
{
  std::size_t window = 0;
  std::string first_stage; /*!< earliest stage whose output differs */
  bool decision_differs = false;
};

struct verification_report
{
  std::uint64_t seed = 0;
  std::size_t windows = 0;
  int window_length = 0;
  std::size_t mismatches = 0;          /*!< windows where any stage output differs */
  std::size_t decision_mismatches = 0;
  std::vector<std::pair<std::string, std::size_t>> stage_mismatches; /*!< per stage, in stage order */
  std::vector<window_mismatch> details;                              /*!< at most `max_details` entries */

  bool passed() const { return mismatches == 0u && decision_mismatches == 0u; }
};

struct verify_options
{
  std::uint64_t seed = 1;
  std::size_t count = 100;
  std::optional<int> window_length = std::nullopt; /*!< defaults to twice the receptive field */
  std::size_t max_details = 16;
  unsigned threads = 1;
};

/*! \brief Deterministic random windows of `bits`-bit samples. */
inline std::vector<std::vector<std::int64_t>> random_windows( std::uint64_t seed, std::size_t count, int length, int bits )
{
  std::mt19937_64 rng( seed );
  auto const [lo, hi] = sample_range( bits );
  auto const span = static_cast<std::uint64_t>( hi - lo ) + 1u;
  std::vector<std::vector<std::int64_t>> out( count, std::vector<std::int64_t>( static_cast<std::size_t>( length ) ) );
  for ( auto& w : out )
    for ( auto& x : w )
      x = lo + static_cast<std::int64_t>( rng() % span );
  return out;
}

/*! \brief Runs `count` random windows through the netlist and the reference and compares every stage.
 *
 * `spec` may be in either phase; it is compared in deployment order, where
 * the reference trace lines up with the netlist stages by id.
 */
inline verification_report verify_equivalence( network_spec const& spec, lut_netlist const& n, verify_options const& opts = {} )
{
  verification_report report;
  report.seed = opts.seed;
  report.windows = opts.count;
  for ( auto const& s : n.stages )
    report.stage_mismatches.emplace_back( s.id, 0u );
  if ( opts.count == 0 )
    return report;

  auto const deployment = spec.phase == network_phase::training ? reorder_for_deployment( spec ) : spec;
  auto const plan = identify_precomputable_blocks( deployment, 64 );
  int const length = opts.window_length.value_or( 2 * receptive_field( plan ) );
  report.window_length = length;
  auto const windows = random_windows( opts.seed, opts.count, length, n.input_bits );
  auto const simulated = simulate_windows( n, windows, opts.threads );

  for ( std::size_t w = 0; w < windows.size(); ++w )
  {
    auto const ref = reference_forward( deployment, windows[w] );
    auto const& sim = simulated[w];
    std::optional<std::string> first;
    for ( std::size_t si = 0; si < n.stages.size(); ++si )
    {
      bit_matrix const* expected = nullptr;
      for ( auto const& e : ref.trace )
        if ( e.id == n.stages[si].id )
          expected = &e.bits;
      if ( expected == nullptr || *expected != sim.stage_outputs[si] )
      {
        ++report.stage_mismatches[si].second;
        if ( !first )
          first = n.stages[si].id;
      }
    }
    bool const decision_differs = ref.has_output && ref.decision != sim.decision;
    if ( decision_differs )
      ++report.decision_mismatches;
    if ( first || decision_differs )
    {
      if ( first )
        ++report.mismatches;
      if ( report.details.size() < opts.max_details )
        report.details.push_back( { w, first.value_or( "" ), decision_differs } );
    }
  }
  return report;
}

inline nlohmann::json to_json( verification_report const& r )
{
  nlohmann::json out;
  out["status"] = r.passed() ? "passed" : "failed";
  out["seed"] = r.seed;
  out["windows"] = r.windows;
  out["window_length"] = r.window_length;
  out["mismatches"] = r.mismatches;
  out["decision_mismatches"] = r.decision_mismatches;
  out["stage_mismatches"] = nlohmann::json::array();
  for ( auto const& [id, count] : r.stage_mismatches )
    out["stage_mismatches"].push_back( { { "stage", id }, { "windows", count } } );
  out["first_divergence"] = nlohmann::json::array();
  for ( auto const& d : r.details )
    out["first_divergence"].push_back( { { "window", d.window }, { "stage", d.first_stage }, { "decision_differs", d.decision_differs } } );
  return out;
}

} // namespace lutcnn
