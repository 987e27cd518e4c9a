/*!
  \file netlist.hpp
  \brief Streaming LUT netlist: stages of LUT trees, binary pools and delay lines

  The netlist consumes one input sample per clock cycle. Every stage owns
  delay lines that expose the last `kernel - 1` valid inputs, combinational
  logic (LUT trees or pool reductions), and one output register. Strided
  pooling uses an enable counter. An input sample reaches the output
  register of stage s after s cycles, so the pipeline depth equals the
  number of stages.
*/

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bit_vector.hpp"
#include "cost_model.hpp"
#include "decompose.hpp"
#include "error.hpp"
#include "transform.hpp"
#include "truth_table.hpp"

namespace lutcnn
{

using signal_id = std::uint32_t;

struct lut_node
{
  std::string id;
  std::vector<signal_id> inputs;
  bit_vector config;
  signal_id output = 0;

  friend bool operator==( lut_node const&, lut_node const& ) = default;
};

/*! \brief OR/AND over a window of one channel, inputs ordered oldest first. */
struct pool_node
{
  std::string id;
  pool_mode mode = pool_mode::or_reduce;
  std::vector<signal_id> inputs;
  signal_id output = 0;

  friend bool operator==( pool_node const&, pool_node const& ) = default;
};

/*! \brief Shift register; `taps[d - 1]` holds the input from d valid samples ago. */
struct delay_node
{
  signal_id input = 0;
  std::vector<signal_id> taps;

  friend bool operator==( delay_node const&, delay_node const& ) = default;
};

enum class stage_type
{
  block,
  pool
};

struct netlist_stage
{
  std::string id;
  stage_type type = stage_type::block;
  block_kind kind = block_kind::hidden;
  int kernel = 1;
  int stride = 1;
  std::vector<signal_id> inputs;    /*!< previous stage registers (or the input port) */
  std::vector<delay_node> delays;   /*!< one per input signal when kernel > 1 */
  std::vector<lut_node> luts;       /*!< children before parents */
  std::vector<pool_node> pools;
  std::vector<signal_id> results;   /*!< combinational value per output channel */
  std::vector<signal_id> registers; /*!< output register per output channel */

  std::optional<precomputable_block> block;
  std::optional<truth_table> table;

  friend bool operator==( netlist_stage const&, netlist_stage const& ) = default;
};

struct lut_netlist
{
  int input_bits = 0;
  int k_lut = default_lut_inputs;
  signal_id signal_count = 0;
  std::vector<signal_id> input_port;
  std::vector<netlist_stage> stages;

  int pipeline_depth() const { return static_cast<int>( stages.size() ); }

  std::size_t lut_count() const
  {
    std::size_t n = 0;
    for ( auto const& s : stages )
      n += s.luts.size();
    return n;
  }

  friend bool operator==( lut_netlist const&, lut_netlist const& ) = default;
};

/*! \brief Shortest input window that produces one output of the final stage. */
inline int receptive_field( compile_plan const& plan )
{
  int r = 1;
  for ( auto it = plan.stages.rbegin(); it != plan.stages.rend(); ++it )
    std::visit(
        [&]( auto const& s ) {
          using T = std::decay_t<decltype( s )>;
          if constexpr ( std::is_same_v<T, precomputable_block> )
            r = ( r - 1 ) * s.params.stride + s.params.k;
          else
            r = ( r - 1 ) * s.stride + s.kernel;
        },
        *it );
  return r;
}

/*! \brief Output length of every stage for an input window of `length` samples (0 once a window does not fit). */
inline std::vector<int> stage_lengths( compile_plan const& plan, int length )
{
  std::vector<int> out;
  for ( auto const& st : plan.stages )
  {
    auto const [k, s] = std::visit(
        []( auto const& x ) -> std::pair<int, int> {
          using T = std::decay_t<decltype( x )>;
          if constexpr ( std::is_same_v<T, precomputable_block> )
            return { x.params.k, x.params.stride };
          else
            return { x.kernel, x.stride };
        },
        st );
    length = length >= k ? ( length - k ) / s + 1 : 0;
    out.push_back( length );
  }
  return out;
}

inline std::uint64_t estimated_cycles( lut_netlist const& n, std::uint64_t window_length )
{
  return window_length + static_cast<std::uint64_t>( n.pipeline_depth() );
}

struct netlist_options
{
  int k_lut = default_lut_inputs;
  std::optional<int> window_length; /*!< checked against every kernel when set */
};

/*! \brief Assembles the streaming netlist from a plan and one table per block stage.
 *
 * `tables` holds the tables of the block stages in plan order.
 */
inline lut_netlist build_netlist( compile_plan const& plan, std::vector<truth_table> const& tables, netlist_options const& opts = {} )
{
  if ( plan.stages.empty() )
    throw error( error_kind::structure, "netlist", "nothing to build: the plan has no stages" );
  if ( !std::holds_alternative<precomputable_block>( plan.stages.front() ) ||
       std::get<precomputable_block>( plan.stages.front() ).kind != block_kind::input )
    throw error( error_kind::structure, "netlist", "the first stage must be the input block" );
  if ( opts.window_length )
  {
    auto const lengths = stage_lengths( plan, *opts.window_length );
    for ( std::size_t i = 0; i < lengths.size(); ++i )
      if ( lengths[i] == 0 )
        throw error( error_kind::structure, "netlist",
                     "stage " + stage_id( plan.stages[i] ) + ": kernel larger than the available history for a window of " +
                         std::to_string( *opts.window_length ) + " samples (receptive field " + std::to_string( receptive_field( plan ) ) + ")" );
  }

  lut_netlist n;
  n.input_bits = plan.input_bits;
  n.k_lut = opts.k_lut;
  auto fresh = [&]() { return n.signal_count++; };
  for ( int b = 0; b < plan.input_bits; ++b )
    n.input_port.push_back( fresh() );

  std::vector<signal_id> current = n.input_port;
  std::size_t table_index = 0;
  for ( auto const& st : plan.stages )
  {
    netlist_stage stage;
    stage.inputs = current;
    stage.id = stage_id( st );

    auto make_delays = [&]( int kernel ) {
      if ( kernel <= 1 )
        return;
      for ( auto in : stage.inputs )
      {
        delay_node d{ in, {} };
        for ( int t = 1; t < kernel; ++t )
          d.taps.push_back( fresh() );
        stage.delays.push_back( std::move( d ) );
      }
    };
    // signal carrying input `index` delayed by `delay` valid samples
    auto delayed = [&]( std::size_t index, int delay ) {
      return delay == 0 ? stage.inputs[index] : stage.delays[index].taps[static_cast<std::size_t>( delay - 1 )];
    };

    if ( auto const* b = std::get_if<precomputable_block>( &st ) )
    {
      if ( table_index >= tables.size() )
        throw error( error_kind::structure, "netlist", "missing truth table for block " + b->id );
      auto const& table = tables[table_index++];
      if ( table.phi() != b->phi() || table.m() != b->m() )
        throw error( error_kind::structure, "netlist", "truth table shape does not match block " + b->id );
      if ( static_cast<int>( stage.inputs.size() ) != b->input_width() )
        throw error( error_kind::structure, "netlist", "block " + b->id + " expects " + std::to_string( b->input_width() ) +
                                                           " input signals, got " + std::to_string( stage.inputs.size() ) );
      stage.type = stage_type::block;
      stage.kind = b->kind;
      stage.kernel = b->params.k;
      stage.stride = b->params.stride;
      make_delays( stage.kernel );

      for ( int o = 0; o < b->m(); ++o )
      {
        auto const tree = decompose_function( table.column( o ), table.phi(), opts.k_lut );
        std::vector<signal_id> local( static_cast<std::size_t>( tree.phi ) + tree.nodes.size() );
        for ( int i = 0; i < tree.phi; ++i )
        {
          auto const src = b->source_of( o, i );
          local[static_cast<std::size_t>( i )] =
              delayed( static_cast<std::size_t>( src.channel * b->input_bits + src.bit ), b->params.k - 1 - src.tap );
        }
        for ( std::size_t k = 0; k < tree.nodes.size(); ++k )
        {
          lut_node node;
          node.id = stage.id + ".o" + std::to_string( o ) + ".n" + std::to_string( k );
          for ( auto in : tree.nodes[k].inputs )
            node.inputs.push_back( local[in] );
          node.config = tree.nodes[k].config;
          node.output = fresh();
          local[static_cast<std::size_t>( tree.phi ) + k] = node.output;
          stage.luts.push_back( std::move( node ) );
        }
        stage.results.push_back( local[tree.root] );
      }
      stage.block = *b;
      stage.table = table;
    }
    else
    {
      auto const& p = std::get<pool_stage>( st );
      if ( static_cast<int>( stage.inputs.size() ) != p.channels() )
        throw error( error_kind::structure, "netlist", "pool " + p.id + " channel count does not match its input" );
      stage.type = stage_type::pool;
      stage.kind = block_kind::hidden;
      stage.kernel = p.kernel;
      stage.stride = p.stride;
      make_delays( stage.kernel );
      for ( int c = 0; c < p.channels(); ++c )
      {
        pool_node node;
        node.id = stage.id + ".c" + std::to_string( c );
        node.mode = p.modes[static_cast<std::size_t>( c )];
        for ( int t = 0; t < p.kernel; ++t )
          node.inputs.push_back( delayed( static_cast<std::size_t>( c ), p.kernel - 1 - t ) );
        node.output = fresh();
        stage.results.push_back( node.output );
        stage.pools.push_back( std::move( node ) );
      }
    }
    for ( std::size_t o = 0; o < stage.results.size(); ++o )
      stage.registers.push_back( fresh() );
    current = stage.registers;
    n.stages.push_back( std::move( stage ) );
  }
  if ( table_index != tables.size() )
    throw error( error_kind::structure, "netlist", "more truth tables than block stages" );
  return n;
}

struct compiled_network
{
  network_spec spec; /*!< deployment order */
  compile_plan plan;
  std::vector<truth_table> tables;
  lut_netlist netlist;
};

struct compile_options
{
  int k_lut = default_lut_inputs;
  int fan_in_cap = default_fan_in_cap;
  std::optional<int> window_length;
};

/*! \brief Reorders (if needed), identifies blocks, precomputes tables and builds the netlist. */
inline compiled_network compile_network( network_spec const& spec, compile_options const& opts = {} )
{
  compiled_network out;
  out.spec = spec.phase == network_phase::training ? reorder_for_deployment( spec ) : spec;
  out.plan = identify_precomputable_blocks( out.spec, opts.fan_in_cap );
  for ( auto const& b : out.plan.blocks() )
    out.tables.push_back( precompute_block( b, opts.fan_in_cap ) );
  out.netlist = build_netlist( out.plan, out.tables, { opts.k_lut, opts.window_length } );
  return out;
}

/*! \brief True when every LUT and pool input is driven by a source or an earlier node. */
inline bool is_acyclic( lut_netlist const& n )
{
  // registers, delay taps and the input port are sources; every LUT/pool
  // input must be a source or an earlier combinational output
  std::vector<std::uint8_t> ready( n.signal_count, 0 );
  for ( auto s : n.input_port )
    ready[s] = 1;
  for ( auto const& st : n.stages )
  {
    for ( auto r : st.registers )
      ready[r] = 1;
    for ( auto const& d : st.delays )
      for ( auto t : d.taps )
        ready[t] = 1;
  }
  for ( auto const& st : n.stages )
  {
    for ( auto const& l : st.luts )
    {
      for ( auto in : l.inputs )
        if ( in >= n.signal_count || !ready[in] )
          return false;
      ready[l.output] = 1;
    }
    for ( auto const& p : st.pools )
    {
      for ( auto in : p.inputs )
        if ( in >= n.signal_count || !ready[in] )
          return false;
      ready[p.output] = 1;
    }
    for ( auto r : st.results )
      if ( !ready[r] )
        return false;
  }
  return true;
}

namespace detail
{

inline std::string to_hex( bit_vector const& v )
{
  std::string out;
  std::size_t const digits = ( v.size() + 3u ) / 4u;
  for ( std::size_t d = digits; d-- > 0; )
  {
    unsigned nibble = 0;
    for ( unsigned b = 0; b < 4u; ++b )
      if ( d * 4u + b < v.size() && v.get( d * 4u + b ) )
        nibble |= 1u << b;
    out.push_back( "0123456789abcdef"[nibble] );
  }
  return out;
}

inline bit_vector from_hex( std::string const& s, std::size_t size )
{
  bit_vector v( size );
  std::size_t const digits = s.size();
  for ( std::size_t d = 0; d < digits; ++d )
  {
    char const c = s[digits - 1 - d];
    unsigned nibble;
    if ( c >= '0' && c <= '9' )
      nibble = static_cast<unsigned>( c - '0' );
    else if ( c >= 'a' && c <= 'f' )
      nibble = static_cast<unsigned>( c - 'a' + 10 );
    else
      throw error( error_kind::parse, "netlist", "bad hex digit in '" + s + "'" );
    for ( unsigned b = 0; b < 4u; ++b )
      if ( d * 4u + b < size )
        v.set( d * 4u + b, ( nibble >> b ) & 1u );
      else if ( ( nibble >> b ) & 1u )
        throw error( error_kind::parse, "netlist", "hex value '" + s + "' wider than " + std::to_string( size ) + " bits" );
  }
  return v;
}

inline nlohmann::json signals_json( std::vector<signal_id> const& v ) { return nlohmann::json( v ); }

inline std::vector<signal_id> signals_from( nlohmann::json const& j, lut_netlist const& n, std::string const& path )
{
  if ( !j.is_array() )
    throw error( error_kind::parse, "netlist", path + ": expected an array of signal ids" );
  std::vector<signal_id> out;
  for ( auto const& v : j )
  {
    if ( !v.is_number_unsigned() || v.get<std::uint64_t>() >= n.signal_count )
      throw error( error_kind::parse, "netlist", path + ": signal id out of range" );
    out.push_back( v.get<signal_id>() );
  }
  return out;
}

inline nlohmann::json const& at( nlohmann::json const& j, char const* key, std::string const& path )
{
  if ( !j.is_object() || !j.contains( key ) )
    throw error( error_kind::parse, "netlist", path + "." + key + ": missing field" );
  return j.at( key );
}

template<typename T>
T get_as( nlohmann::json const& j, char const* key, std::string const& path )
{
  try
  {
    return at( j, key, path ).get<T>();
  }
  catch ( nlohmann::json::exception const& )
  {
    throw error( error_kind::parse, "netlist", path + "." + key + ": wrong type" );
  }
}

} // namespace detail

inline constexpr int netlist_format_version = 1;

/*! \brief Serializes nodes, configs (hex, bit 0 is the least significant digit) and edges.
 *
 * Block stages also carry their table (one hex column per output) and the
 * grouping needed to map window bits to input signals.
 */
inline nlohmann::json netlist_to_json( lut_netlist const& n )
{
  using nlohmann::json;
  json out;
  out["format"] = "lutcnn-netlist";
  out["version"] = netlist_format_version;
  out["input_bits"] = n.input_bits;
  out["k_lut"] = n.k_lut;
  out["signal_count"] = n.signal_count;
  out["pipeline_depth"] = n.pipeline_depth();
  out["lut_count"] = n.lut_count();
  out["input_port"] = detail::signals_json( n.input_port );
  out["stages"] = json::array();
  for ( auto const& s : n.stages )
  {
    json js;
    js["id"] = s.id;
    js["type"] = s.type == stage_type::block ? "block" : "pool";
    js["kind"] = std::string( to_string( s.kind ) );
    js["kernel"] = s.kernel;
    js["stride"] = s.stride;
    js["inputs"] = detail::signals_json( s.inputs );
    js["delays"] = json::array();
    for ( auto const& d : s.delays )
      js["delays"].push_back( { { "input", d.input }, { "taps", detail::signals_json( d.taps ) } } );
    js["luts"] = json::array();
    for ( auto const& l : s.luts )
      js["luts"].push_back( { { "id", l.id }, { "inputs", detail::signals_json( l.inputs ) }, { "config", detail::to_hex( l.config ) }, { "output", l.output } } );
    js["pools"] = json::array();
    for ( auto const& p : s.pools )
      js["pools"].push_back( { { "id", p.id }, { "mode", std::string( to_string( p.mode ) ) }, { "inputs", detail::signals_json( p.inputs ) }, { "output", p.output } } );
    js["results"] = detail::signals_json( s.results );
    js["registers"] = detail::signals_json( s.registers );
    if ( s.block )
    {
      auto const& p = s.block->params;
      js["block"] = { { "c", p.c }, { "k", p.k }, { "g", p.g }, { "f", p.f }, { "stride", p.stride }, { "input_bits", s.block->input_bits } };
    }
    if ( s.table )
    {
      json cols = json::array();
      for ( int o = 0; o < s.table->m(); ++o )
        cols.push_back( detail::to_hex( s.table->column( o ) ) );
      js["table"] = { { "phi", s.table->phi() }, { "m", s.table->m() }, { "columns", cols } };
    }
    out["stages"].push_back( std::move( js ) );
  }
  return out;
}

inline std::string netlist_to_string( lut_netlist const& n ) { return netlist_to_json( n ).dump( 1 ) + "\n"; }

/*! \brief Inverse of `netlist_to_json`; block weights are not part of the format and come back empty. */
inline lut_netlist netlist_from_json( nlohmann::json const& doc )
{
  using detail::get_as;
  if ( !doc.is_object() || doc.value( "format", std::string{} ) != "lutcnn-netlist" )
    throw error( error_kind::parse, "netlist", "$.format: not a lutcnn netlist" );
  if ( get_as<int>( doc, "version", "$" ) != netlist_format_version )
    throw error( error_kind::parse, "netlist", "$.version: unsupported netlist version" );
  lut_netlist n;
  n.input_bits = get_as<int>( doc, "input_bits", "$" );
  n.k_lut = get_as<int>( doc, "k_lut", "$" );
  n.signal_count = get_as<signal_id>( doc, "signal_count", "$" );
  n.input_port = detail::signals_from( detail::at( doc, "input_port", "$" ), n, "$.input_port" );
  auto const& stages = detail::at( doc, "stages", "$" );
  if ( !stages.is_array() )
    throw error( error_kind::parse, "netlist", "$.stages: expected an array" );
  for ( std::size_t i = 0; i < stages.size(); ++i )
  {
    auto const& js = stages[i];
    auto const path = "$.stages[" + std::to_string( i ) + "]";
    netlist_stage s;
    s.id = get_as<std::string>( js, "id", path );
    auto const type = get_as<std::string>( js, "type", path );
    if ( type != "block" && type != "pool" )
      throw error( error_kind::parse, "netlist", path + ".type: unknown stage type '" + type + "'" );
    s.type = type == "block" ? stage_type::block : stage_type::pool;
    auto const kind = get_as<std::string>( js, "kind", path );
    s.kind = kind == "input" ? block_kind::input : kind == "output" ? block_kind::output : block_kind::hidden;
    s.kernel = get_as<int>( js, "kernel", path );
    s.stride = get_as<int>( js, "stride", path );
    if ( s.kernel < 1 || s.stride < 1 )
      throw error( error_kind::parse, "netlist", path + ": kernel and stride must be positive" );
    s.inputs = detail::signals_from( detail::at( js, "inputs", path ), n, path + ".inputs" );
    for ( auto const& d : detail::at( js, "delays", path ) )
      s.delays.push_back( { detail::signals_from( nlohmann::json::array( { detail::at( d, "input", path ) } ), n, path + ".delays" ).front(),
                            detail::signals_from( detail::at( d, "taps", path ), n, path + ".delays" ) } );
    for ( auto const& l : detail::at( js, "luts", path ) )
    {
      lut_node node;
      node.id = get_as<std::string>( l, "id", path + ".luts" );
      node.inputs = detail::signals_from( detail::at( l, "inputs", path ), n, path + ".luts" );
      if ( node.inputs.size() > static_cast<std::size_t>( n.k_lut ) )
        throw error( error_kind::parse, "netlist", path + ".luts: node " + node.id + " has more than k_lut inputs" );
      node.config = detail::from_hex( get_as<std::string>( l, "config", path + ".luts" ), std::size_t{ 1 } << node.inputs.size() );
      node.output = detail::signals_from( nlohmann::json::array( { detail::at( l, "output", path ) } ), n, path + ".luts" ).front();
      s.luts.push_back( std::move( node ) );
    }
    for ( auto const& p : detail::at( js, "pools", path ) )
    {
      pool_node node;
      node.id = get_as<std::string>( p, "id", path + ".pools" );
      auto const mode = get_as<std::string>( p, "mode", path + ".pools" );
      if ( mode != "or" && mode != "and" )
        throw error( error_kind::parse, "netlist", path + ".pools: unknown pool mode '" + mode + "'" );
      node.mode = mode == "or" ? pool_mode::or_reduce : pool_mode::and_reduce;
      node.inputs = detail::signals_from( detail::at( p, "inputs", path ), n, path + ".pools" );
      node.output = detail::signals_from( nlohmann::json::array( { detail::at( p, "output", path ) } ), n, path + ".pools" ).front();
      s.pools.push_back( std::move( node ) );
    }
    s.results = detail::signals_from( detail::at( js, "results", path ), n, path + ".results" );
    s.registers = detail::signals_from( detail::at( js, "registers", path ), n, path + ".registers" );
    if ( s.results.size() != s.registers.size() )
      throw error( error_kind::parse, "netlist", path + ": results and registers differ in length" );
    if ( js.contains( "block" ) )
    {
      auto const& jb = js.at( "block" );
      precomputable_block b;
      b.id = s.id;
      b.kind = s.kind;
      b.params = { get_as<int>( jb, "c", path + ".block" ), get_as<int>( jb, "k", path + ".block" ), get_as<int>( jb, "g", path + ".block" ),
                   get_as<int>( jb, "f", path + ".block" ), get_as<int>( jb, "stride", path + ".block" ) };
      b.input_bits = get_as<int>( jb, "input_bits", path + ".block" );
      if ( !b.params.valid() || b.input_bits < 1 )
        throw error( error_kind::parse, "netlist", path + ".block: invalid block parameters" );
      s.block = std::move( b );
    }
    if ( js.contains( "table" ) )
    {
      auto const& jt = js.at( "table" );
      int const phi = get_as<int>( jt, "phi", path + ".table" );
      int const m = get_as<int>( jt, "m", path + ".table" );
      if ( phi < 1 || phi > 30 || m < 1 )
        throw error( error_kind::parse, "netlist", path + ".table: implausible shape" );
      auto const& cols = detail::at( jt, "columns", path + ".table" );
      if ( !cols.is_array() || cols.size() != static_cast<std::size_t>( m ) )
        throw error( error_kind::parse, "netlist", path + ".table.columns: expected one column per output" );
      truth_table t( s.id, s.kind, phi, m );
      for ( int o = 0; o < m; ++o )
      {
        if ( !cols[static_cast<std::size_t>( o )].is_string() )
          throw error( error_kind::parse, "netlist", path + ".table.columns: expected hex strings" );
        auto const col = detail::from_hex( cols[static_cast<std::size_t>( o )].get<std::string>(), t.rows() );
        for ( std::size_t r = 0; r < t.rows(); ++r )
          t.set( r, o, col.get( r ) );
      }
      s.table = std::move( t );
    }
    n.stages.push_back( std::move( s ) );
  }
  if ( !is_acyclic( n ) )
    throw error( error_kind::structure, "netlist", "netlist has undriven or cyclic combinational signals" );
  return n;
}

inline lut_netlist netlist_from_string( std::string const& text )
{
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse( text );
  }
  catch ( nlohmann::json::parse_error const& e )
  {
    throw error( error_kind::parse, "netlist", std::string( "malformed JSON: " ) + e.what() );
  }
  return netlist_from_json( doc );
}

} // namespace lutcnn
