'''Tests for the baby-hgrn package.'''
