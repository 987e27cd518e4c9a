#include <catch_amalgamated.hpp>

#include <lutcnn/architectures.hpp>
#include <lutcnn/netlist.hpp>
#include <lutcnn/verify.hpp>

#include "support/random_networks.hpp"

using namespace lutcnn;

namespace
{

network_spec const& ecg_spec()
{
  static network_spec const s = randomize_parameters( ecg_network( 6, split_config::from_tuple( { 6, 6, 6, 6, 1, 1, 6 } ), 8 ), 12 );
  return s;
}

} // namespace

TEST_CASE( "compiled networks verify cleanly", "[verify]" )
{
  auto const c = compile_network( ecg_spec() );
  auto const r = verify_equivalence( ecg_spec(), c.netlist, { 1, 20, {}, 16, 2 } );
  CHECK( r.passed() );
  CHECK( r.windows == 20u );
  CHECK( r.window_length == 2 * 311 );
  CHECK( r.stage_mismatches.size() == 14u );
  CHECK( r.details.empty() );
  auto const j = to_json( r );
  CHECK( j["status"] == "passed" );
  CHECK( j["window_length"] == 622 );
}

TEST_CASE( "random networks verify cleanly", "[verify][property]" )
{
  gen::rng_t rng( 19 );
  for ( int i = 0; i < 25; ++i )
  {
    auto const spec = gen::random_training_network( rng );
    auto const c = compile_network( spec );
    auto const r = verify_equivalence( spec, c.netlist, { .seed = rng(), .count = 10 } );
    INFO( "network " << i );
    CHECK( r.passed() );
  }
}

TEST_CASE( "an injected fault is localized to its stage", "[verify]" )
{
  auto const c = compile_network( ecg_spec() );
  auto n = c.netlist;
  auto& stage = n.stages[4]; // split2_alpha
  REQUIRE( stage.id == "split2_alpha" );
  // invert output 0 of the stage by complementing its root LUT
  auto& root = stage.luts[0];
  for ( std::size_t i = 0; i < root.config.size(); ++i )
    root.config.flip( i );

  auto const r = verify_equivalence( ecg_spec(), n, { .seed = 7, .count = 10 } );
  CHECK_FALSE( r.passed() );
  CHECK( r.mismatches == 10u );
  REQUIRE_FALSE( r.details.empty() );
  for ( auto const& d : r.details )
    CHECK( d.first_stage == "split2_alpha" );
  for ( std::size_t s = 0; s < 4; ++s )
    CHECK( r.stage_mismatches[s].second == 0u );
  CHECK( r.stage_mismatches[4].second == 10u );
  CHECK( to_json( r )["status"] == "failed" );
}

TEST_CASE( "details are capped", "[verify]" )
{
  auto const c = compile_network( ecg_spec() );
  auto n = c.netlist;
  for ( std::size_t i = 0; i < n.stages[0].luts.back().config.size(); ++i )
    n.stages[0].luts.back().config.flip( i );
  auto const r = verify_equivalence( ecg_spec(), n, { 3, 12, {}, 4 } );
  CHECK( r.mismatches == 12u );
  CHECK( r.details.size() == 4u );
}

TEST_CASE( "zero windows is an empty success", "[verify]" )
{
  auto const c = compile_network( ecg_spec() );
  auto const r = verify_equivalence( ecg_spec(), c.netlist, { .seed = 1, .count = 0 } );
  CHECK( r.passed() );
  CHECK( r.windows == 0u );
  CHECK( to_json( r )["status"] == "passed" );
}

TEST_CASE( "verification is deterministic per seed", "[verify]" )
{
  auto const c = compile_network( ecg_spec() );
  auto const a = to_json( verify_equivalence( ecg_spec(), c.netlist, { .seed = 99, .count = 6 } ) ).dump();
  auto const b = to_json( verify_equivalence( ecg_spec(), c.netlist, { 99, 6, {}, 16, 3 } ) ).dump();
  CHECK( a == b );
  CHECK( random_windows( 5, 3, 10, 4 ) == random_windows( 5, 3, 10, 4 ) );
  CHECK( random_windows( 5, 3, 10, 4 ) != random_windows( 6, 3, 10, 4 ) );
  for ( auto const& w : random_windows( 5, 20, 50, 3 ) )
    for ( auto x : w )
      CHECK( ( x >= -4 && x <= 3 ) );
}
