/*!
  \file report.hpp
  \brief Machine-readable compilation report
*/

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "config_search.hpp"
#include "cost_model.hpp"
#include "netlist.hpp"
#include "transform.hpp"
#include "verify.hpp"

namespace lutcnn
{

inline constexpr int report_format_version = 1;

struct report_inputs
{
  network_spec spec; /*!< either phase */
  std::optional<std::vector<scored_config>> configs = std::nullopt; /*!< defaults to the split blocks of `spec` */
  lut_netlist const* netlist = nullptr;
  verification_report const* verification = nullptr;
  std::optional<std::uint64_t> window_length = std::nullopt;
  int k_lut = default_lut_inputs;
};

/*! \brief Aggregates analytic costs, split scores, pipeline timing and verification status. */
inline nlohmann::json emit_report( report_inputs const& in )
{
  using nlohmann::json;
  auto const deployment = in.spec.phase == network_phase::training ? reorder_for_deployment( in.spec ) : in.spec;
  auto const cost = network_cost( deployment, in.k_lut );

  json out;
  out["format"] = "lutcnn-report";
  out["version"] = report_format_version;
  out["k_lut"] = in.k_lut;

  out["blocks"] = json::array();
  for ( auto const& item : cost.items )
  {
    json b = { { "id", item.name }, { "phi", item.fan_in }, { "outputs", item.outputs }, { "luts", item.luts.value } };
    if ( in.netlist )
      for ( auto const& s : in.netlist->stages )
        if ( s.id == item.name )
        {
          b["type"] = s.type == stage_type::block ? "block" : "pool";
          if ( s.type == stage_type::block )
            b["netlist_luts"] = s.luts.size();
          else
            b["pool_nodes"] = s.pools.size();
        }
    out["blocks"].push_back( std::move( b ) );
  }
  out["total_luts"] = cost.total.value;
  out["cost"] = to_json( cost );

  std::vector<scored_config> configs;
  if ( in.configs )
    configs = *in.configs;
  else
    for ( auto const& l : deployment.layers )
      if ( auto const* x = std::get_if<split_conv_layer>( &l ) )
        configs.push_back( score_config( x->config, in.k_lut ) );
  out["split_configs"] = json::array();
  for ( auto const& s : configs )
    out["split_configs"].push_back( to_json( s ) );

  if ( in.netlist )
  {
    out["pipeline_depth"] = in.netlist->pipeline_depth();
    out["netlist_luts"] = in.netlist->lut_count();
    if ( in.window_length )
    {
      out["window_length"] = *in.window_length;
      out["cycles"] = estimated_cycles( *in.netlist, *in.window_length );
    }
  }
  else
    out["pipeline_depth"] = 0;

  if ( in.verification )
    out["verification"] = to_json( *in.verification );
  else
    out["verification"] = { { "status", "not run" } };
  return out;
}

} // namespace lutcnn
