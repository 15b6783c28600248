"""Party versions of Phragmén's and Thiele's sequential methods."""
