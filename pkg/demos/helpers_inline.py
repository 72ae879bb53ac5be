"""Inline HTML fixture shared by the demo scripts."""

FILMOGRAPHY_PAGE = """
<!DOCTYPE html>
<html>
<head><title>Tom Cruise Movies</title></head>
<body>
<h1>Tom Cruise Movies</h1>
<h2>Filmography</h2>
<p>Complete list sorted by release date.</p>
<table>
  <tr><th>Year</th><th>Movie</th><th>Role</th></tr>
  <tr><td>2017</td><td>The Mummy</td><td>Nick Morton</td></tr>
  <tr><td>2014</td><td>Edge of Tomorrow</td><td>Cage</td></tr>
  <tr><td>2013</td><td>Movie 43</td><td>Himself</td></tr>
  <tr><td>2012</td><td>Jack Reacher</td><td>Reacher</td></tr>
  <tr><td>2005</td><td>War of the Worlds</td><td>Ray Ferrier</td></tr>
</table>
<h2>Co-stars</h2>
<p>People who appeared alongside him.</p>
<table>
  <tr><th>Actor</th><th>Movie</th><th>Year</th></tr>
  <tr><td>Emily Blunt</td><td>Edge of Tomorrow</td><td>2014</td></tr>
  <tr><td>Nicole Kidman</td><td>Days of Thunder</td><td>1990</td></tr>
  <tr><td>Jamie Foxx</td><td>Collateral</td><td>2004</td></tr>
  <tr><td>Rosamund Pike</td><td>Jack Reacher</td><td>2012</td></tr>
  <tr><td>Dakota Fanning</td><td>War of the Worlds</td><td>2005</td></tr>
</table>
</body>
</html>
"""
