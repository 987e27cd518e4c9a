/*!
  \file simulate.hpp
  \brief Cycle-accurate functional simulation of a LUT netlist

  Timing model, per clock cycle:

  - the input register latches the next sample (valid) and flags the final
    sample of a window (last);
  - each stage reads the previous stage's register values from before the
    edge; with valid input and a full window (fill >= kernel - 1) it emits
    on every `stride`-th position, latching the combinational results;
  - `last` travels one stage per cycle even when no value is emitted, and
    resets the window counters behind it.

  A window of T samples is done when `last` reaches the final register,
  which takes T + pipeline_depth cycles.
*/

#pragma once

#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "error.hpp"
#include "netlist.hpp"
#include "reference.hpp"

namespace lutcnn
{

struct simulation_result
{
  bool decision = false;
  std::uint64_t cycles = 0;
  std::vector<bit_matrix> stage_outputs; /*!< emitted values per stage, [time][channel] */
};

namespace detail
{

struct stage_state
{
  int fill = 0;  /*!< valid inputs seen, saturating at kernel - 1 */
  int phase = 0; /*!< position within the stride */
  bool out_valid = false;
  bool out_last = false;
};

inline void shift_delays( netlist_stage const& s, std::vector<std::uint8_t>& v )
{
  for ( auto const& d : s.delays )
  {
    for ( std::size_t t = d.taps.size(); t-- > 1; )
      v[d.taps[t]] = v[d.taps[t - 1]];
    v[d.taps[0]] = v[d.input];
  }
}

inline void evaluate_stage( netlist_stage const& s, std::vector<std::uint8_t>& v )
{
  for ( auto const& l : s.luts )
  {
    std::size_t idx = 0;
    for ( std::size_t i = 0; i < l.inputs.size(); ++i )
      idx |= static_cast<std::size_t>( v[l.inputs[i]] ) << i;
    v[l.output] = l.config.get( idx ) ? 1u : 0u;
  }
  for ( auto const& p : s.pools )
  {
    bool acc = p.mode == pool_mode::and_reduce;
    for ( auto in : p.inputs )
      acc = p.mode == pool_mode::and_reduce ? ( acc && v[in] ) : ( acc || v[in] );
    v[p.output] = acc ? 1u : 0u;
  }
}

} // namespace detail

/*! \brief Streams one window through the netlist. */
inline simulation_result simulate_netlist( lut_netlist const& n, std::span<std::int64_t const> samples )
{
  if ( n.stages.empty() )
    throw error( error_kind::structure, "netlist", "cannot simulate an empty netlist" );
  if ( samples.empty() )
    throw error( error_kind::input, "netlist", "empty input window" );
  auto const [lo, hi] = sample_range( n.input_bits );
  for ( auto x : samples )
    if ( x < lo || x > hi )
      throw error( error_kind::input, "netlist", "sample " + std::to_string( x ) + " does not fit " + std::to_string( n.input_bits ) + " bits" );

  std::vector<std::uint8_t> v( n.signal_count, 0u );
  std::vector<detail::stage_state> state( n.stages.size() );
  bool in_valid = false, in_last = false;
  simulation_result result;
  result.stage_outputs.resize( n.stages.size() );
  std::vector<bool> emitted_any( n.stages.size(), false );

  std::uint64_t const budget = samples.size() + n.stages.size() + 1u;
  for ( std::uint64_t cycle = 0; cycle < budget; ++cycle )
  {
    // later stages first, so every stage sees its predecessor's pre-edge registers
    for ( std::size_t si = n.stages.size(); si-- > 0; )
    {
      auto const& s = n.stages[si];
      auto& st = state[si];
      bool const valid = si == 0 ? in_valid : state[si - 1].out_valid;
      bool const last = si == 0 ? in_last : state[si - 1].out_last;
      st.out_valid = false;
      st.out_last = last;
      if ( valid )
      {
        if ( st.fill == s.kernel - 1 )
        {
          if ( st.phase == 0 )
          {
            detail::evaluate_stage( s, v );
            std::vector<std::uint8_t> out( s.results.size() );
            for ( std::size_t o = 0; o < s.results.size(); ++o )
              v[s.registers[o]] = out[o] = v[s.results[o]];
            result.stage_outputs[si].push_back( std::move( out ) );
            emitted_any[si] = true;
            st.out_valid = true;
          }
          st.phase = ( st.phase + 1 ) % s.stride;
        }
        else
          ++st.fill;
        detail::shift_delays( s, v );
      }
      if ( last )
        st.fill = st.phase = 0;
    }

    // input register
    in_valid = cycle < samples.size();
    in_last = cycle + 1 == samples.size();
    if ( in_valid )
    {
      auto const raw = static_cast<std::uint64_t>( samples[cycle] );
      for ( std::size_t b = 0; b < n.input_port.size(); ++b )
        v[n.input_port[b]] = static_cast<std::uint8_t>( ( raw >> b ) & 1u );
    }

    if ( state.back().out_last )
    {
      result.cycles = cycle + 1;
      break;
    }
  }
  if ( result.cycles == 0 )
    throw error( error_kind::state, "netlist", "simulation did not finish" );
  if ( !emitted_any.back() )
    throw error( error_kind::structure, "netlist",
                 "window of " + std::to_string( samples.size() ) + " samples is shorter than the receptive field" );
  result.decision = v[n.stages.back().registers.front()] != 0u;
  return result;
}

/*! \brief Simulates independent windows, optionally in parallel; results are in window order. */
inline std::vector<simulation_result> simulate_windows( lut_netlist const& n, std::vector<std::vector<std::int64_t>> const& windows,
                                                       unsigned threads = 1 )
{
  std::vector<simulation_result> out( windows.size() );
  if ( threads <= 1 || windows.size() < 2 )
  {
    for ( std::size_t i = 0; i < windows.size(); ++i )
      out[i] = simulate_netlist( n, windows[i] );
    return out;
  }
  std::vector<std::exception_ptr> errors( threads );
  {
    std::vector<std::jthread> workers;
    for ( unsigned w = 0; w < threads; ++w )
      workers.emplace_back( [&, w] {
        try
        {
          for ( std::size_t i = w; i < windows.size(); i += threads )
            out[i] = simulate_netlist( n, windows[i] );
        }
        catch ( ... )
        {
          errors[w] = std::current_exception();
        }
      } );
  }
  for ( auto const& e : errors )
    if ( e )
      std::rethrow_exception( e );
  return out;
}

} // namespace lutcnn
