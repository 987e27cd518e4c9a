#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <regex>

#include <lutcnn/architectures.hpp>
#include <lutcnn/emit_vhdl.hpp>
#include <lutcnn/netlist.hpp>
#include <lutcnn/report.hpp>

#include "support/random_networks.hpp"
#include "support/vhdl_parse.hpp"

using namespace lutcnn;

namespace
{

compiled_network const& ecg()
{
  static compiled_network const c =
      compile_network( randomize_parameters( ecg_network( 6, split_config::from_tuple( { 6, 6, 6, 6, 1, 1, 6 } ) ), 5 ) );
  return c;
}

std::string lower( std::string s )
{
  std::transform( s.begin(), s.end(), s.begin(), []( unsigned char ch ) { return static_cast<char>( std::tolower( ch ) ); } );
  return s;
}

} // namespace

TEST_CASE( "one entity per stage plus top and testbench", "[emit]" )
{
  auto const& n = ecg().netlist;
  auto const bundle = emit_vhdl( n );
  REQUIRE( bundle.files.size() == n.stages.size() + 2u );
  std::size_t blocks = 0, pools = 0;
  for ( auto const& s : n.stages )
  {
    auto const* f = bundle.find( s.id + ".vhd" );
    REQUIRE( f != nullptr );
    CHECK( vhdl::entity_name( f->content ) == "lutcnn_" + s.id );
    ( s.type == stage_type::block ? blocks : pools )++;
  }
  CHECK( blocks == 10u );
  CHECK( pools == 4u );
  CHECK( vhdl::entity_name( bundle.find( "top.vhd" )->content ) == "lutcnn_top" );
  CHECK( vhdl::entity_name( bundle.find( "tb_top.vhd" )->content ) == "tb_top" );
  CHECK( bundle.find( "tb_top.vhd" )->content.find( "WINDOW : integer := 311;" ) != std::string::npos );
  CHECK( emit_vhdl( n, { 500 } ).find( "tb_top.vhd" )->content.find( "WINDOW : integer := 500;" ) != std::string::npos );
}

TEST_CASE( "emission is byte-deterministic", "[emit]" )
{
  CHECK( emit_vhdl( ecg().netlist ) == emit_vhdl( ecg().netlist ) );
  // a netlist read back from JSON emits the same files
  CHECK( emit_vhdl( netlist_from_string( netlist_to_string( ecg().netlist ) ) ) == emit_vhdl( ecg().netlist ) );
}

TEST_CASE( "truth table constants parse back", "[emit]" )
{
  auto const bundle = emit_vhdl( ecg().netlist );
  for ( auto const& s : ecg().netlist.stages )
  {
    if ( s.type != stage_type::block )
      continue;
    auto const constants = vhdl::table_constants( bundle.find( s.id + ".vhd" )->content );
    REQUIRE( constants.size() == static_cast<std::size_t>( s.table->m() ) );
    for ( int o = 0; o < s.table->m(); ++o )
    {
      std::string expected;
      for ( std::size_t r = 0; r < s.table->rows(); ++r )
        expected += s.table->get( r, o ) ? '1' : '0';
      INFO( s.id << " output " << o );
      CHECK( constants.at( o ) == expected );
    }
  }
}

TEST_CASE( "index wiring of grouped blocks", "[emit]" )
{
  gen::rng_t rng( 23 );
  for ( int round = 0; round < 20; ++round )
  {
    auto const c = compile_network( gen::random_training_network( rng ) );
    auto const bundle = emit_vhdl( c.netlist );
    for ( auto const& s : c.netlist.stages )
    {
      if ( s.type != stage_type::block )
        continue;
      auto const& text = bundle.find( s.id + ".vhd" )->content;
      auto const& p = s.block->params;
      int const bits = s.block->input_bits;
      std::regex const line( R"(idx(\d+)\((\d+)\) <= win\((\d+)\);)" );
      std::size_t seen = 0;
      for ( auto it = std::sregex_iterator( text.begin(), text.end(), line ); it != std::sregex_iterator(); ++it, ++seen )
      {
        int const o = std::stoi( ( *it )[1] ), i = std::stoi( ( *it )[2] ), w = std::stoi( ( *it )[3] );
        // i = (tap * s_in + j) * bits + b reads channel group * s_in + j at that tap
        int const b = i % bits, j = ( i / bits ) % p.s_in(), tap = i / bits / p.s_in();
        int const channel = o / p.s_out() * p.s_in() + j;
        CHECK( w == ( tap * p.c + channel ) * bits + b );
      }
      CHECK( seen == static_cast<std::size_t>( s.table->m() * s.table->phi() ) );
    }
  }
}

TEST_CASE( "pool entities reduce with the channel mode", "[emit]" )
{
  auto const bundle = emit_vhdl( ecg().netlist );
  for ( auto const& s : ecg().netlist.stages )
  {
    if ( s.type != stage_type::pool )
      continue;
    auto const& text = bundle.find( s.id + ".vhd" )->content;
    for ( std::size_t ch = 0; ch < s.pools.size(); ++ch )
    {
      auto const start = text.find( "  y(" + std::to_string( ch ) + ") <= " );
      REQUIRE( start != std::string::npos );
      auto const stmt = text.substr( start, text.find( ';', start ) - start );
      bool const is_and = s.pools[ch].mode == pool_mode::and_reduce;
      CHECK( ( stmt.find( is_and ? " and " : " or " ) != std::string::npos ) );
      CHECK( ( stmt.find( is_and ? " or " : " and " ) == std::string::npos ) );
      CHECK( static_cast<int>( std::count( stmt.begin(), stmt.end(), 'w' ) ) == s.kernel );
    }
  }
}

TEST_CASE( "no vendor primitives", "[emit]" )
{
  for ( auto const& f : emit_vhdl( ecg().netlist ).files )
    for ( auto const* word : vhdl::vendor_denylist )
    {
      INFO( f.name << " contains " << word );
      CHECK( lower( f.content ).find( lower( word ) ) == std::string::npos );
    }
}

TEST_CASE( "emitter rejects unusable netlists", "[emit]" )
{
  CHECK_THROWS_AS( emit_vhdl( lut_netlist{} ), error );
  auto n = ecg().netlist;
  n.stages[2].id = "bad id";
  CHECK_THROWS_AS( emit_vhdl( n ), error );
  n = ecg().netlist;
  n.stages[2].id = n.stages[1].id;
  CHECK_THROWS_AS( emit_vhdl( n ), error );
  n = ecg().netlist;
  n.stages[1].table.reset();
  CHECK_THROWS_AS( emit_vhdl( n ), error );
}

TEST_CASE( "bundles are written to disk", "[emit]" )
{
  auto const dir = std::filesystem::temp_directory_path() / "lutcnn_emit_test";
  std::filesystem::remove_all( dir );
  auto const bundle = emit_vhdl( ecg().netlist );
  write_bundle( bundle, dir );
  for ( auto const& f : bundle.files )
    CHECK( read_text_file( ( dir / f.name ).string(), "emit" ) == f.content );
  std::filesystem::remove_all( dir );
}

TEST_CASE( "report totals and timing", "[emit][report]" )
{
  auto const& c = ecg();
  report_inputs in{ c.spec, std::nullopt, &c.netlist, nullptr, 5250, 6 };
  auto const r = emit_report( in );
  std::uint64_t sum = 0;
  for ( auto const& b : r["blocks"] )
    sum += b["luts"].get<std::uint64_t>();
  CHECK( r["total_luts"] == sum );
  CHECK( r["pipeline_depth"] == 14 );
  CHECK( r["cycles"] == 5264 );
  CHECK( r["netlist_luts"] == c.netlist.lut_count() );
  CHECK( r["split_configs"].size() == 4u );
  CHECK( r["verification"]["status"] == "not run" );
  CHECK( r["blocks"][3]["type"] == "pool" );
  CHECK( r["blocks"][3]["pool_nodes"] == 6 );

  auto const ver = verify_equivalence( c.spec, c.netlist, { .seed = 1, .count = 2 } );
  in.verification = &ver;
  CHECK( emit_report( in )["verification"]["status"] == "passed" );
}

TEST_CASE( "report of an empty network", "[report]" )
{
  network_spec empty;
  report_inputs in;
  in.spec = empty;
  auto const r = emit_report( in );
  CHECK( r["total_luts"] == 0 );
  CHECK( r["blocks"].empty() );
  CHECK( r["pipeline_depth"] == 0 );
}
