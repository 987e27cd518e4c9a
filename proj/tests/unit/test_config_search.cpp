#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include <lutcnn/config_search.hpp>

#include "support/oracles.hpp"
#include "support/random_networks.hpp"

using namespace lutcnn;

namespace
{

std::set<std::array<int, 7>> tuples( std::vector<split_config> const& v )
{
  std::set<std::array<int, 7>> out;
  for ( auto const& c : v )
    out.insert( c.tuple() );
  return out;
}

} // namespace

TEST_CASE( "search space of the ECG hidden block", "[config_search]" )
{
  auto const found = find_filter_pairs( { 12, 6, 1, 12, 1 }, 12 );
  auto const set = tuples( found );
  CHECK( set.count( { 12, 6, 12, 12, 1, 1, 12 } ) == 1u );
  CHECK( set.count( { 12, 6, 12, 24, 1, 3, 12 } ) == 1u );
  CHECK( set.count( { 12, 6, 6, 6, 1, 6, 12 } ) == 1u );
  CHECK( set == oracle::naive_filter_pairs( 12, 6, 12, 12 ) );
  CHECK( std::is_sorted( found.begin(), found.end(), []( auto const& a, auto const& b ) { return a.tuple() < b.tuple(); } ) );
  for ( auto const& c : found )
  {
    INFO( to_string( c ) );
    CHECK( is_valid( c ) );
    CHECK( fan_in( c.alpha ) <= 12 );
    CHECK( fan_in( c.beta ) <= 12 );
    CHECK( c.replaced() == conv_params{ 12, 6, 1, 12, 1 } );
  }
}

TEST_CASE( "kernel order restricts the search", "[config_search]" )
{
  conv_params const f0{ 6, 3, 1, 6, 1 };
  auto const first = find_filter_pairs( f0, 9, { kernel_order::kernel_first } );
  auto const last = find_filter_pairs( f0, 9, { kernel_order::kernel_last } );
  auto const both = find_filter_pairs( f0, 9 );
  CHECK( std::all_of( first.begin(), first.end(), []( auto const& c ) { return c.alpha.k == 3 && c.beta.k == 1; } ) );
  CHECK( std::all_of( last.begin(), last.end(), []( auto const& c ) { return c.alpha.k == 1 && c.beta.k == 3; } ) );
  CHECK( both.size() == first.size() + last.size() );
}

TEST_CASE( "degenerate bounds produce no configurations", "[config_search]" )
{
  CHECK( find_filter_pairs( { 12, 6, 1, 12, 1 }, 0 ).empty() );
  // a depthwise kernel of 6 never fits a fan-in of 5
  CHECK( find_filter_pairs( { 12, 6, 1, 12, 1 }, 5 ).empty() );
}

TEST_CASE( "filter pairs match the brute-force oracle", "[config_search][property]" )
{
  gen::rng_t rng( 21 );
  for ( int i = 0; i < 300; ++i )
  {
    int const c0 = gen::pick( rng, 1, 16 ), k0 = gen::pick( rng, 1, 9 ), f0 = gen::pick( rng, 1, 16 );
    int const phi = gen::pick( rng, 1, 14 );
    INFO( c0 << " " << k0 << " " << f0 << " phi " << phi );
    CHECK( tuples( find_filter_pairs( { c0, k0, 1, f0, 1 }, phi ) ) == oracle::naive_filter_pairs( c0, k0, f0, phi ) );
  }
}

TEST_CASE( "cross layer connectivity", "[config_search]" )
{
  CHECK( clc( split_config::from_tuple( { 6, 1, 3, 6, 1, 2, 6 } ) ) == rational{ 2, 3 } );
  CHECK( clc( split_config::from_tuple( { 6, 1, 3, 6, 1, 3, 6 } ) ) == rational{ 1, 3 } );
  CHECK( clc( split_config::from_tuple( { 12, 6, 12, 12, 1, 1, 12 } ) ) == rational{ 1, 1 } );
  CHECK( to_string( rational::make( 4, 6 ) ) == "2/3" );
  CHECK( rational{ 1, 3 } < rational{ 2, 3 } );
}

TEST_CASE( "connectivity counts reachable input channels", "[config_search][property]" )
{
  // walk the group connections explicitly and count inputs feeding output channel 0
  gen::rng_t rng( 8 );
  for ( int i = 0; i < 200; ++i )
  {
    auto const cfg = gen::random_split( rng, gen::pick( rng, 1, 12 ), 24, 12 );
    auto const& a = cfg.alpha;
    auto const& b = cfg.beta;
    std::set<int> mids, inputs;
    int const gb0 = 0; // output 0 is in beta group 0
    for ( int m = gb0 * b.s_in(); m < ( gb0 + 1 ) * b.s_in(); ++m )
      mids.insert( m );
    for ( int m : mids )
    {
      int const ga = m / a.s_out();
      for ( int c = ga * a.s_in(); c < ( ga + 1 ) * a.s_in(); ++c )
        inputs.insert( c );
    }
    INFO( to_string( cfg ) );
    CHECK( clc( cfg ) == rational::make( static_cast<std::int64_t>( inputs.size() ), a.c ) );
  }
}

TEST_CASE( "score uses the natural log of the summed half costs", "[config_search]" )
{
  auto const cfg = split_config::from_tuple( { 12, 6, 12, 12, 1, 1, 12 } );
  // phi_a = 6, phi_b = 12, cost = 12 * 1 + 12 * 85
  double const expected = 1.0 * 6.0 * 12.0 / ( std::log( 1032.0 ) * std::log( 1032.0 ) );
  CHECK( score( cfg ) == Catch::Approx( expected ).epsilon( 1e-12 ) );

  auto const s = score_config( cfg );
  CHECK( s.phi_alpha == 6 );
  CHECK( s.phi_beta == 12 );
  CHECK( s.block_cost.value == 1032u );
  CHECK( s.analytic_cost == s.block_cost );
  CHECK( score_config( cfg, 6, lut_count{ 6505 } ).analytic_cost.value == 6505u );

  auto const j = to_json( s );
  CHECK( j["clc"] == "1/1" );
  CHECK( j["block_cost"] == 1032 );
}

TEST_CASE( "score examples", "[config_search]" )
{
  // CLC^2 * phi_a * phi_b / ln(cost)^2, evaluated by hand; the rounded figures are good to about 1e-3
  CHECK( score( split_config::from_tuple( { 6, 6, 6, 6, 1, 1, 6 } ) ) == Catch::Approx( 36.0 / std::pow( std::log( 12.0 ), 2 ) ) );
  CHECK( score( split_config::from_tuple( { 6, 6, 6, 6, 1, 1, 6 } ) ) == Catch::Approx( 5.829 ).margin( 2e-3 ) );
  CHECK( score( split_config::from_tuple( { 4, 2, 2, 2, 1, 1, 2 } ) ) == Catch::Approx( 4.164 ).margin( 2e-3 ) );
  CHECK( score( split_config::from_tuple( { 8, 6, 8, 8, 1, 1, 8 } ) ) == Catch::Approx( 3.204 ).margin( 2e-3 ) );
}

TEST_CASE( "ranking, budget and threshold", "[config_search]" )
{
  std::vector<scored_config> all;
  for ( auto const& c : find_filter_pairs( { 12, 6, 1, 12, 1 }, 12 ) )
    all.push_back( score_config( c ) );

  auto const ranked = rank_configs( all );
  REQUIRE( ranked.size() == all.size() );
  for ( std::size_t i = 1; i < ranked.size(); ++i )
    CHECK( ranked[i - 1].score >= ranked[i].score );

  auto const budget = rank_configs( all, { lut_count{ 100 }, {}, {} } );
  CHECK( std::all_of( budget.begin(), budget.end(), []( auto const& s ) { return s.analytic_cost.value <= 100u; } ) );
  CHECK( budget.size() < all.size() );

  auto const top = rank_configs( all, { {}, 3, {} } );
  REQUIRE( top.size() == 3u );
  CHECK( top.front().cfg == ranked.front().cfg );

  double const t = ranked[ranked.size() / 2].score;
  auto const above = rank_configs( all, { {}, {}, t } );
  CHECK( std::all_of( above.begin(), above.end(), [&]( auto const& s ) { return s.score > t; } ) );
}

TEST_CASE( "pareto front on a hand example", "[config_search]" )
{
  std::vector<pareto_point> pts{ { lut_count{ 100 }, 0.90, "a" },
                                 { lut_count{ 200 }, 0.95, "b" },
                                 { lut_count{ 150 }, 0.89, "c" },
                                 { lut_count{ 100 }, 0.85, "d" },
                                 { lut_count{ 300 }, 0.95, "e" } };
  auto const front = pareto_front( pts );
  std::vector<std::string> ids;
  for ( auto const& p : front )
    ids.push_back( p.id );
  CHECK( ids == std::vector<std::string>{ "a", "b" } );
}

TEST_CASE( "pareto front matches quadratic domination check", "[config_search][property]" )
{
  gen::rng_t rng( 17 );
  for ( int round = 0; round < 100; ++round )
  {
    std::vector<pareto_point> pts;
    int const n = gen::pick( rng, 0, 30 );
    for ( int i = 0; i < n; ++i )
      pts.push_back( { lut_count{ static_cast<std::uint64_t>( gen::pick( rng, 1, 20 ) ) }, gen::pick( rng, 0, 10 ) / 10.0,
                       std::to_string( i ) } );
    std::set<std::string> expected;
    for ( auto const& p : pts )
    {
      bool dominated = false;
      for ( auto const& q : pts )
        dominated |= q.cost <= p.cost && q.accuracy >= p.accuracy && ( q.cost < p.cost || q.accuracy > p.accuracy );
      if ( !dominated )
        expected.insert( p.id );
    }
    std::set<std::string> got;
    for ( auto const& p : pareto_front( pts ) )
      got.insert( p.id );
    CHECK( got == expected );
  }
}

TEST_CASE( "score condition violations", "[config_search]" )
{
  // values of the reported counter example: lower score, cheaper, but less accurate is fine;
  // lower score that is also more accurate and not more expensive is a violation
  std::vector<experiment_entry> e{ { 6.52, lut_count{ 2713 }, 93.92, "i" },
                                   { 11.03, lut_count{ 4465 }, 94.40, "j" },
                                   { 0.05, lut_count{ 4465 }, 75.50, "k" },
                                   { 0.08, lut_count{ 6505 }, 73.21, "l" } };
  auto const v = score_condition_violations( e );
  CHECK( v == std::vector<std::pair<std::size_t, std::size_t>>{ { 2, 3 } } );
  CHECK( score_condition_violations( {} ).empty() );
}
